#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "wlearn/errors.hpp"
#include "wlearn/prospective.hpp"

using namespace wlearn;
using doctest::Approx;

namespace {

bool same_bits(const ExpectedLearning& a, const ExpectedLearning& b) {
    return std::memcmp(&a.estimate, &b.estimate, sizeof(double)) == 0 &&
           std::memcmp(&a.mc_std_error, &b.mc_std_error, sizeof(double)) == 0 &&
           std::memcmp(&a.second_moment, &b.second_moment, sizeof(double)) == 0 &&
           a.replicates == b.replicates && a.seed == b.seed;
}

// Direct transcription of the displayed identity.
double bound_oracle(double sp, double s, double n) {
    const double a = sp * sp / (s * s / (n * sp * sp) + 1.0);
    const double b = 1.0 - 1.0 / std::sqrt(1.0 + sp * sp * n / (s * s));
    return a + sp * sp * b * b;
}

}  // namespace

TEST_CASE("decision_maker_prior") {
    const PioneerSetup base{NormalDist(3, 1), NormalDist(0, 3), 0.0, SamplingModel(1, 10)};
    CHECK(std::get<NormalDist>(decision_maker_prior(base)) == NormalDist(3, 1));
    PioneerSetup one = base;
    one.weight = 1.0;
    CHECK(std::get<NormalDist>(decision_maker_prior(one)) == NormalDist(0, 3));

    PioneerSetup mid = base;
    mid.weight = 0.4;
    const auto mix = std::get<MixtureDist>(decision_maker_prior(mid));
    REQUIRE(mix.components().size() == 2);
    CHECK(mix.components()[0].weight == Approx(0.4));
    CHECK(std::get<NormalDist>(mix.components()[0].dist) == NormalDist(0, 3));
    CHECK(mix.components()[1].weight == Approx(0.6));
    CHECK(std::get<NormalDist>(mix.components()[1].dist) == NormalDist(3, 1));

    PioneerSetup nested = mid;
    nested.pioneer = MixtureDist({{0.5, NormalDist(-1, 1)}, {0.5, NormalDist(1, 1)}});
    const auto flat = std::get<MixtureDist>(decision_maker_prior(nested));
    CHECK(flat.components().size() == 3);
    CHECK(flat.components()[0].weight == Approx(0.2));

    PioneerSetup bad = base;
    bad.weight = 1.5;
    CHECK_THROWS_AS(decision_maker_prior(bad), ValidationError);
}

TEST_CASE("expected_learning_bound_sq") {
    CHECK(expected_learning_bound_sq(1, 1, 1) == Approx(0.5 + std::pow(1 - 1 / std::sqrt(2.0), 2)).epsilon(1e-15));
    CHECK(std::abs(expected_learning_bound_sq(1, 1, 1) - 0.58579) < 1e-5);
    CHECK(expected_learning_bound_sq(1, 1, 0) == 0.0);
    for (double sp : {0.5, 1.0, 3.0})
        for (double s : {0.5, 2.0})
            for (std::size_t n : {1, 7, 100})
                CHECK(expected_learning_bound_sq(sp, s, n) == Approx(bound_oracle(sp, s, n)).epsilon(1e-13));

    SUBCASE("large-n limit") {
        // The gap to 2 sp^2 shrinks like n^-1/2: 2 sp^3 / (s sqrt(n)) to leading order.
        for (double sp : {0.5, 1.0, 2.0}) {
            const double lim = 2 * sp * sp;
            CHECK(expected_learning_bound_sq(sp, 1, 1000000000000000ULL) == Approx(lim).epsilon(1e-6));
            const double gap6 = lim - expected_learning_bound_sq(sp, 1, 1000000);
            const double gap8 = lim - expected_learning_bound_sq(sp, 1, 100000000);
            CHECK(gap6 / gap8 == Approx(10.0).epsilon(1e-2));
            CHECK(gap8 == Approx(2 * sp * sp * sp / 1e4).epsilon(1e-2));
        }
    }

    SUBCASE("monotone in n, sigma_prior and sigma") {
        for (std::size_t n = 1; n < 200; ++n)
            CHECK(expected_learning_bound_sq(1.3, 0.7, n + 1) > expected_learning_bound_sq(1.3, 0.7, n));
        for (double sp = 0.1; sp < 5; sp += 0.1)
            CHECK(expected_learning_bound_sq(sp + 0.05, 1, 20) > expected_learning_bound_sq(sp, 1, 20));
        for (double s = 0.1; s < 5; s += 0.1)
            CHECK(expected_learning_bound_sq(1, s + 0.05, 20) < expected_learning_bound_sq(1, s, 20));
    }

    CHECK_THROWS_AS(expected_learning_bound_sq(0, 1, 1), ValidationError);
}

TEST_CASE("expected_learning_mc") {
    const NormalDist prior(3, 1);

    SUBCASE("huge n against the perfect-information limit") {
        // With theta revealed, W2 = sqrt((mu0 - theta)^2 + sigma0^2), theta ~ N(mu0, sigma0).
        const double limit = oracle::simpson(
            [](double t) { return std::sqrt((3 - t) * (3 - t) + 1) * oracle::normal_density(t, 3, 1); },
            -9, 15, 20000);
        const ExpectedLearning e = expected_learning_mc(prior, prior, prior, SamplingModel(1, 1000000),
                                                        {10000, 17, 1024, 1});
        CHECK(std::abs(e.estimate - limit) < 3 * e.mc_std_error + 1e-3);
    }

    SUBCASE("n = 1 second moment matches the identity") {
        const ExpectedLearning e =
            expected_learning_mc(prior, prior, prior, SamplingModel(1, 1), {10000, 21, 1024, 1});
        CHECK(std::abs(e.second_moment - 0.5858) < 3 * e.second_moment_std_error);
        CHECK(e.estimate <= std::sqrt(e.second_moment) + 3 * e.mc_std_error);
        CHECK(e.replicates == 10000);
        CHECK(e.seed == 21);
    }

    SUBCASE("deterministic across runs and threads") {
        const MixtureDist mix({{0.4, NormalDist(0, 3)}, {0.6, NormalDist(3, 1)}});
        const ExpectedLearning a = expected_learning_mc(mix, mix, prior, SamplingModel(1, 10), {100, 5, 512, 1});
        const ExpectedLearning b = expected_learning_mc(mix, mix, prior, SamplingModel(1, 10), {100, 5, 512, 1});
        const ExpectedLearning c = expected_learning_mc(mix, mix, prior, SamplingModel(1, 10), {100, 5, 512, 3});
        CHECK(same_bits(a, b));
        CHECK(same_bits(a, c));
        const ExpectedLearning d = expected_learning_mc(mix, mix, prior, SamplingModel(1, 10), {100, 6, 512, 1});
        CHECK_FALSE(same_bits(a, d));
    }

    SUBCASE("non-conjugate update path") {
        const TruncatedNormalDist trunc(0.2, 0.4, 0, std::numeric_limits<double>::infinity());
        const ExpectedLearning e = expected_learning_mc(NormalDist(0.2, 0.3), trunc, trunc,
                                                        SamplingModel(0.5, 20), {200, 9, 512, 1});
        CHECK(e.estimate > 0.0);
        CHECK(std::isfinite(e.mc_std_error));
    }

    CHECK_THROWS_AS(expected_learning_mc(prior, prior, prior, SamplingModel(1, 1), {99, 0, 1024, 1}),
                    ValidationError);
}

TEST_CASE("weight_sweep") {
    const PioneerSetup setup{NormalDist(3, 1), NormalDist(0, 3), 0.0, SamplingModel(1, 10)};
    const std::vector<double> ws{0.0, 0.5, 1.0};
    const std::vector<std::size_t> ns{10, 50};
    const McOptions opt{400, 11, 512, 1};
    const auto curve = weight_sweep(setup, ws, ns, opt);
    REQUIRE(curve.size() == 6);
    CHECK(curve[0].w == 0.0);
    CHECK(curve[0].n == 10);
    CHECK(curve[1].n == 50);
    CHECK(curve[2].w == 0.5);
    for (const auto& p : curve) {
        CHECK(std::isfinite(p.expected_learning));
        CHECK(std::isfinite(p.mc_std_error));
        CHECK(p.expected_learning > 0.0);
    }

    SUBCASE("singleton equals a direct call") {
        const std::vector<double> w{0.3};
        const std::vector<std::size_t> n{50};
        const auto single = weight_sweep(setup, w, n, opt);
        PioneerSetup s = setup;
        s.weight = 0.3;
        const Distribution1D dm = decision_maker_prior(s);
        const ExpectedLearning e = expected_learning_mc(dm, dm, setup.consensus, SamplingModel(1, 50), opt);
        REQUIRE(single.size() == 1);
        CHECK(std::memcmp(&single[0].expected_learning, &e.estimate, sizeof(double)) == 0);
        CHECK(std::memcmp(&single[0].mc_std_error, &e.mc_std_error, sizeof(double)) == 0);
    }

    SUBCASE("w = 0 respects Jensen against the identity") {
        const std::vector<double> w{0.0};
        for (std::size_t n : {10, 50, 200}) {
            const std::vector<std::size_t> nn{n};
            const auto p = weight_sweep(setup, w, nn, {2000, 3, 512, 1});
            CHECK(p[0].expected_learning <= std::sqrt(expected_learning_bound_sq(1, 1, n)) + 3 * p[0].mc_std_error);
        }
    }

    CHECK_THROWS_AS(weight_sweep(setup, std::vector<double>{}, ns, opt), ValidationError);
}
