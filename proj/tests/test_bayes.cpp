#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "oracles.hpp"
#include "wlearn/bayes.hpp"
#include "wlearn/errors.hpp"

using namespace wlearn;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Textbook precision-weighted update, written out independently.
std::pair<double, double> conjugate_oracle(double mu, double sd, double y, double se) {
    const double prec = 1.0 / (sd * sd) + 1.0 / (se * se);
    const double mean = (mu / (sd * sd) + y / (se * se)) / prec;
    return {mean, std::sqrt(1.0 / prec)};
}

const std::vector<Study> kLawnSigns{{2.5, 1.7}, {-1.4, 5.7}, {1.8, 0.9}, {-1.2, 2.6}};

}  // namespace

TEST_CASE("update_conjugate") {
    const NormalDist a = update_conjugate(NormalDist(0, 10), Study(6.67, 5.77));
    CHECK(std::abs(a.mu() - 5.00) <= 0.01);
    CHECK(std::abs(a.sigma() - 5.00) <= 0.01);

    const NormalDist b = update_conjugate(NormalDist(0, 5), Study(2.5, 1.7));
    CHECK(std::abs(b.mu() - 2.2) <= 0.05);
    CHECK(std::abs(b.sigma() - 1.6) <= 0.05);
    CHECK(b.mu() == Approx(2.24).epsilon(0.005));
    CHECK(b.sigma() == Approx(1.61).epsilon(0.005));

    const NormalDist c = update_conjugate(NormalDist(0, 1), Study(0, 1));
    CHECK(c.mu() == 0.0);
    CHECK(c.sigma() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("conjugate properties on random inputs") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> loc(-10, 10), scale(0.05, 20);
    for (int i = 0; i < 500; ++i) {
        const NormalDist prior(loc(gen), scale(gen));
        const Study s(loc(gen), scale(gen));
        const NormalDist post = update_conjugate(prior, s);
        const auto [m, sd] = conjugate_oracle(prior.mu(), prior.sigma(), s.estimate, s.std_error);
        CHECK(post.mu() == Approx(m).epsilon(1e-12));
        CHECK(post.sigma() == Approx(sd).epsilon(1e-12));
        CHECK(post.sigma() < prior.sigma());
        if (prior.mu() != s.estimate) {
            CHECK(post.mu() > std::min(prior.mu(), s.estimate));
            CHECK(post.mu() < std::max(prior.mu(), s.estimate));
        }
    }
}

TEST_CASE("update_grid") {
    SUBCASE("normal prior") {
        const GridDensity g = update_grid(NormalDist(0.3, 0.3), Study(0.074, 0.121), -1.5, 1.5, 4096);
        CHECK(std::abs(g.moments().mean - 0.106) <= 0.002);
        CHECK(std::abs(g.moments().sd - 0.112) <= 0.002);
    }

    SUBCASE("matches conjugate moments") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> loc(-5, 5), scale(0.3, 4);
        for (int i = 0; i < 20; ++i) {
            const NormalDist prior(loc(gen), scale(gen));
            const Study s(loc(gen), scale(gen));
            const GridDensity g = update_grid(prior, s, prior.mu() - 8 * prior.sigma(),
                                              prior.mu() + 8 * prior.sigma(), 4096);
            const NormalDist c = update_conjugate(prior, s);
            CHECK(std::abs(g.moments().mean - c.mu()) < 1e-3);
            CHECK(std::abs(g.moments().sd - c.sigma()) < 1e-3);
        }
    }

    SUBCASE("truncated prior keeps its support") {
        const TruncatedNormalDist prior(0.2, 0.4, 0.0, kInf);
        const GridDensity g = update_grid(prior, Study(0.074, 0.121), 0, 2, 4096);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.ws()[i] > 0) CHECK(g.xs()[i] >= 0.0);
        }
        // A truncated normal prior times a normal likelihood is the conjugate
        // posterior truncated to the same bounds.
        const auto [m, sd] = conjugate_oracle(0.2, 0.4, 0.074, 0.121);
        const auto q = oracle::quadrature_moments(
            [m = m, sd = sd](double x) { return oracle::normal_density(x, m, sd); }, 0.0, m + 12 * sd);
        CHECK(g.moments().mean == Approx(q.mean).epsilon(1e-3));
        CHECK(g.moments().sd == Approx(q.sd).epsilon(2e-3));
    }

    SUBCASE("uninformative likelihood") {
        const GridDensity prior({-1, 0, 1}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
        const GridDensity g = update_grid(prior, Study(0, 1e6), 0, 0);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g.ws()[i] - 1.0 / 3) < 1e-6);
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(update_grid(NormalDist(0, 1), Study(0, 1), -1, 1, 4096), TailMassError);
        CHECK_THROWS_AS(update_grid(NormalDist(0, 1), Study(0, 1), 1, -1, 4096), ValidationError);
        CHECK_THROWS_AS(Study(0, 0), ValidationError);
        CHECK_THROWS_AS(Study(std::nan(""), 1), ValidationError);
        CHECK_THROWS_AS(SamplingModel(0, 4), ValidationError);
        CHECK_THROWS_AS(SamplingModel(1, 0), ValidationError);
    }
}

TEST_CASE("mixture update is exact") {
    const MixtureDist prior({{0.4, NormalDist(0, 3)}, {0.6, NormalDist(3, 1)}});
    const Study s(1.0, 0.8);
    const MixtureDist post = update_conjugate(prior, s);
    const GridDensity g = update_grid(prior, s, -25, 25, 8192);
    CHECK(post.moments().mean == Approx(g.moments().mean).epsilon(1e-5));
    CHECK(post.moments().sd == Approx(g.moments().sd).epsilon(1e-5));
    double total = 0.0;
    for (const auto& c : post.components()) total += c.weight;
    CHECK(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("default grid and dispatch") {
    const GridConfig cfg = default_grid(NormalDist(0, 5), Study(30, 1));
    CHECK(cfg.lo <= -40.0);
    CHECK(cfg.hi >= 38.0);
    CHECK(cfg.nodes == 4096);

    const GridConfig trunc = default_grid(TruncatedNormalDist(0.2, 0.4, 0, kInf), Study(0.074, 0.121));
    CHECK(trunc.lo >= 0.0);

    CHECK(std::holds_alternative<NormalDist>(update(NormalDist(0, 1), Study(1, 1))));
    CHECK(std::holds_alternative<GridDensity>(
        update(TruncatedNormalDist(0.2, 0.4, 0, kInf), Study(0.074, 0.121))));
}

TEST_CASE("sequential_update") {
    const PosteriorChain chain = sequential_update(NormalDist(0, 5), kLawnSigns);
    REQUIRE(chain.steps.size() == 4);
    const double rounded_mean[] = {2.2, 1.9, 1.9, 1.6};
    const double rounded_sd[] = {1.6, 1.6, 0.8, 0.7};
    double mu = 0.0, sd = 5.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& n = std::get<NormalDist>(chain.steps[k].posterior);
        std::tie(mu, sd) = conjugate_oracle(mu, sd, kLawnSigns[k].estimate, kLawnSigns[k].std_error);
        CHECK(n.mu() == Approx(mu).epsilon(1e-12));
        CHECK(n.sigma() == Approx(sd).epsilon(1e-12));
        CHECK(std::abs(n.mu() - rounded_mean[k]) <= 0.15);
        CHECK(std::abs(n.sigma() - rounded_sd[k]) <= 0.15);
    }
    CHECK(std::get<NormalDist>(chain.final_posterior()).mu() == Approx(1.59).epsilon(0.005));
    CHECK(std::get<NormalDist>(chain.final_posterior()).sigma() == Approx(0.74).epsilon(0.01));

    SUBCASE("single study equals update_conjugate") {
        const std::vector<Study> one{{2.5, 1.7}};
        const auto single = sequential_update(NormalDist(0, 5), one);
        CHECK(std::get<NormalDist>(single.final_posterior()) ==
              update_conjugate(NormalDist(0, 5), Study(2.5, 1.7)));
        CHECK(std::get<NormalDist>(single.before(0)) == NormalDist(0, 5));
    }

    SUBCASE("sequential equals pooled in any order") {
        double prec = 1.0 / 25.0, wsum = 0.0;
        for (const auto& s : kLawnSigns) {
            prec += s.precision();
            wsum += s.estimate * s.precision();
        }
        std::vector<Study> order = kLawnSigns;
        std::sort(order.begin(), order.end(),
                  [](const Study& a, const Study& b) { return a.estimate < b.estimate; });
        do {
            const auto& post = std::get<NormalDist>(sequential_update(NormalDist(0, 5), order).final_posterior());
            CHECK(std::abs(post.mu() - wsum / prec) < 1e-9);
            CHECK(std::abs(post.sigma() - std::sqrt(1.0 / prec)) < 1e-9);
        } while (std::next_permutation(order.begin(), order.end(), [](const Study& a, const Study& b) {
            return a.estimate < b.estimate;
        }));
    }

    SUBCASE("empty list") {
        CHECK_THROWS_AS(sequential_update(NormalDist(0, 5), std::vector<Study>{}), ValidationError);
    }
}

TEST_CASE("prior_predictive") {
    const auto a = std::get<NormalDist>(prior_predictive(NormalDist(0, 3), SamplingModel(1, 1)));
    CHECK(a.mu() == 0.0);
    CHECK(a.sigma() == Approx(std::sqrt(10.0)).epsilon(1e-15));
    const auto b = std::get<NormalDist>(prior_predictive(NormalDist(3, 1), SamplingModel(2, 4)));
    CHECK(b.mu() == 3.0);
    CHECK(b.sigma() == Approx(std::sqrt(2.0)).epsilon(1e-15));

    SUBCASE("mixture against a simulated predictive") {
        const MixtureDist prior({{0.5, NormalDist(0, 3)}, {0.5, NormalDist(3, 1)}});
        const Distribution1D pred = prior_predictive(prior, SamplingModel(1, 1));
        std::mt19937_64 gen(77);
        std::bernoulli_distribution coin(0.5);
        std::normal_distribution<double> a_theta(0, 3), b_theta(3, 1), noise(0, 1);
        std::vector<double> ys(1000000);
        for (auto& y : ys) y = (coin(gen) ? a_theta(gen) : b_theta(gen)) + noise(gen);
        CHECK(oracle::ks_statistic(ys, [&](double x) { return cdf(pred, x); }) <
              oracle::ks_critical_1e3(ys.size()));
    }

    CHECK_THROWS_AS(prior_predictive(TruncatedNormalDist(0, 1, 0, kInf), SamplingModel(1, 1)),
                    UnsupportedError);
    CHECK_THROWS_AS(prior_predictive(GridDensity({0, 1}, {0.5, 0.5}), SamplingModel(1, 1)),
                    UnsupportedError);
}

TEST_CASE("predictive_density") {
    CHECK(predictive_density(NormalDist(0, 3), SamplingModel(1, 1), 0.0) ==
          Approx(oracle::normal_density(0, 0, std::sqrt(10.0))).epsilon(1e-14));

    SUBCASE("grid prior against a Riemann sum") {
        const GridDensity g = to_grid(NormalDist(1, 2), -15, 17, 512);
        const SamplingModel model(1.5, 3);
        for (double y : {-4.0, 0.0, 1.0, 6.5}) {
            double sum = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                sum += g.ws()[i] * oracle::normal_density(y, g.xs()[i], model.sigma / std::sqrt(3.0));
            CHECK(predictive_density(g, model, y) == Approx(sum).epsilon(1e-6));
        }
    }

    SUBCASE("truncated prior against quadrature") {
        const TruncatedNormalDist prior(0.2, 0.4, 0, kInf);
        const SamplingModel model(0.5, 4);
        const double kept = 1.0 - oracle::normal_cdf(0.0, 0.2, 0.4);
        for (double y : {-0.3, 0.1, 0.9}) {
            const double q = oracle::simpson(
                [&](double t) {
                    return oracle::normal_density(t, 0.2, 0.4) / kept * oracle::normal_density(y, t, 0.25);
                },
                0.0, 6.0, 200000);
            CHECK(predictive_density(prior, model, y) == Approx(q).epsilon(1e-7));
        }
    }

    SUBCASE("far tail stays positive") {
        const NormalDist prior(0, 3);
        const SamplingModel model(1, 1);
        const double sd = std::sqrt(10.0);
        for (double z : {10.0, 20.0, 30.0, -30.0}) {
            const double y = z * sd;
            CHECK(predictive_density(prior, model, y) > 0.0);
            const double expected = -0.5 * z * z - std::log(sd * std::sqrt(2.0 * M_PI));
            CHECK(log_predictive_density(prior, model, y) == Approx(expected).epsilon(1e-12));
        }
        const MixtureDist mix({{0.5, NormalDist(0, 3)}, {0.5, NormalDist(3, 1)}});
        CHECK(predictive_density(mix, model, 95.0) > 0.0);
        CHECK(std::isfinite(log_predictive_density(mix, model, 1e4)));
    }
}
