#include "wlearn/replication.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "wlearn/bayes.hpp"
#include "wlearn/metrics.hpp"
#include "wlearn/prospective.hpp"
#include "wlearn/transport.hpp"

namespace wlearn {

namespace {

class Recorder {
public:
    explicit Recorder(std::vector<ReplicationResult>& out) : out_(out) {}

    void criterion(int c) { current_ = c; }

    void check(const std::string& name, double expected, double actual, double tolerance) {
        const bool ok = std::isfinite(actual) && std::abs(expected - actual) <= tolerance;
        out_.push_back({current_, name, expected, actual, tolerance, ok});
    }

    /// Boolean property recorded as expected 1, actual 1/0.
    void holds(const std::string& name, bool value) { check(name, 1.0, value ? 1.0 : 0.0, 0.0); }

private:
    std::vector<ReplicationResult>& out_;
    int current_ = 0;
};

NormalDist random_normal(Rng& rng, double mean_span = 10.0, double sd_lo = 0.1, double sd_hi = 10.0) {
    const double mu = mean_span * (2.0 * rng.uniform() - 1.0);
    const double sigma = sd_lo * std::pow(sd_hi / sd_lo, rng.uniform());
    return NormalDist(mu, sigma);
}

// W_p^p between equal-size, equal-weight samples by matching order statistics.
double sorted_matching_cost(std::vector<double> a, std::vector<double> b, double p) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
    return acc / static_cast<double>(a.size());
}

struct PaperScenario {
    const char* label;
    NormalDist post;
    double w2;
    double mean_sq;
    double sd_sq;
    double w2_sq;
    double kl_sym;
    double lindley;
};

void scenarios_1_and_4(Recorder& rec, const ReplicationOptions& opt) {
    const NormalDist prior(0.0, 10.0);
    // Third row: the table prints (mu1 - mu0)^2 = 49 and W2^2 = 74, which
    // contradict its own W2 = 5.8; the consistent values 9 and 34 are used.
    const std::array<PaperScenario, 4> rows{{
        {"N(5,5)", NormalDist(5, 5), 7.1, 25, 25, 50, 1.75, 0.69},
        {"N(5,2.5)", NormalDist(5, 2.5), 9.0, 25, 56.3, 81.3, 9.16, 1.37},
        {"N(3,5)", NormalDist(3, 5), 5.8, 9, 25, 34, 1.35, 0.69},
        {"N(0,1)", NormalDist(0, 1), 9.0, 0, 81, 81, 49, 2.3},
    }};
    const auto w2 = opt.w2 ? opt.w2 : [](const NormalDist& a, const NormalDist& b) {
        return w2_normal(a, b);
    };

    rec.criterion(1);
    for (const auto& row : rows) {
        const std::string tag = std::string("N(0,10) -> ") + row.label;
        const double value = w2(prior, row.post);
        rec.check("W2 " + tag, row.w2, value, 0.05);
        // +/-0.05 on W2 propagates to about 2 * W2 * 0.05 on its square.
        rec.check("W2^2 " + tag, row.w2_sq, value * value, 2.0 * row.w2 * 0.05);
        const double dm = row.post.mu() - prior.mu();
        const double ds = row.post.sigma() - prior.sigma();
        rec.check("(mu1-mu0)^2 " + tag, row.mean_sq, dm * dm, 0.05);
        rec.check("(sd1-sd0)^2 " + tag, row.sd_sq, ds * ds, 0.05);
    }

    rec.criterion(4);
    for (const auto& row : rows) {
        const std::string tag = std::string("N(0,10) -> ") + row.label;
        const double kl = kl_normal(row.post, prior) + kl_normal(prior, row.post);
        rec.check("KL_sym " + tag, row.kl_sym, kl, 0.02);
        rec.check("|Lindley| " + tag, row.lindley, std::abs(lindley_normal(prior, row.post)), 0.01);
    }
}

void conjugate_2(Recorder& rec) {
    rec.criterion(2);
    const NormalDist post = update_conjugate(NormalDist(0, 10), Study(6.67, 5.77));
    rec.check("posterior mean, N(0,10) + 6.67 (5.77)", 5.00, post.mu(), 0.01);
    rec.check("posterior sd, N(0,10) + 6.67 (5.77)", 5.00, post.sigma(), 0.01);
}

void lawn_signs_3(Recorder& rec, const ReplicationOptions& opt) {
    rec.criterion(3);
    const std::vector<Study> studies{{2.5, 1.7}, {-1.4, 5.7}, {1.8, 0.9}, {-1.2, 2.6}};
    const PosteriorChain chain = sequential_update(NormalDist(0, 5), studies);
    const auto w2 = [&opt](const NormalDist& a, const NormalDist& b) {
        return opt.w2 ? opt.w2(a, b) : w2_normal(a, b);
    };

    const std::array<std::pair<double, double>, 4> rounded{{{2.2, 1.6}, {1.9, 1.6}, {1.9, 0.8}, {1.6, 0.7}}};
    const std::array<double, 4> step_w2{4.0, 0.3, 0.8, 0.3};
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& before = std::get<NormalDist>(chain.before(k));
        const auto& after = std::get<NormalDist>(chain.steps[k].posterior);
        const std::string tag = "study " + std::to_string(k + 1);
        rec.check("posterior mean after " + tag, rounded[k].first, after.mu(), 0.15);
        rec.check("posterior sd after " + tag, rounded[k].second, after.sigma(), 0.15);
        const double d = w2(before, after);
        rec.check("stepwise W2 " + tag, step_w2[k], d, 0.15);
        sum += d;
    }
    const double end_to_end =
        w2(NormalDist(0, 5), std::get<NormalDist>(chain.final_posterior()));
    rec.check("end-to-end W2 N(0,5) -> final", 4.6, end_to_end, 0.1);
    rec.holds("stepwise W2 sum exceeds end-to-end W2", sum > end_to_end);
}

void citizenship_5_and_6(Recorder& rec) {
    const Study study(0.074, 0.121);

    rec.criterion(5);
    const Distribution1D normal_prior = NormalDist(0.3, 0.3);
    const GridConfig g1 = default_grid(normal_prior, study);
    const GridDensity post1 = update_grid(normal_prior, study, g1.lo, g1.hi, g1.nodes);
    const NormalDist closed = update_conjugate(NormalDist(0.3, 0.3), study);
    const double w2_grid = wp_quantile(normal_prior, post1, 2.0, kDefaultQuantileNodes);
    const double w2_closed = w2_normal(NormalDist(0.3, 0.3), closed);
    rec.check("grid posterior mean", 0.11, post1.moments().mean, 0.01);
    rec.check("grid posterior sd", 0.11, post1.moments().sd, 0.01);
    rec.check("W2 normal prior, grid posterior", 0.27, w2_grid, 0.01);
    rec.check("W2 normal prior, conjugate posterior", 0.27, w2_closed, 0.01);
    rec.check("grid vs closed-form W2", w2_closed, w2_grid, 1e-3);

    rec.criterion(6);
    const Distribution1D trunc_prior =
        TruncatedNormalDist(0.2, 0.4, 0.0, std::numeric_limits<double>::infinity());
    rec.check("latent mass truncated at zero", 0.31, cdf(NormalDist(0.2, 0.4), 0.0), 0.005);
    const GridConfig g2 = default_grid(trunc_prior, study);
    const GridDensity post2 = update_grid(trunc_prior, study, g2.lo, g2.hi, g2.nodes);
    rec.check("W2 truncated prior, grid posterior", 0.34,
              wp_quantile(trunc_prior, post2, 2.0, kDefaultQuantileNodes), 0.02);
}

void cross_method_7(Recorder& rec) {
    rec.criterion(7);
    Rng rng(7001);
    double worst_rel = 0.0;
    for (int i = 0; i < 50; ++i) {
        const NormalDist a = random_normal(rng);
        const NormalDist b = random_normal(rng);
        const double exact = w2_normal(a, b);
        const double quad = wp_quantile(a, b, 2.0, kDefaultQuantileNodes);
        worst_rel = std::max(worst_rel, std::abs(quad - exact) / exact);
    }
    rec.check("max rel. error quantile W2 vs closed form, 50 normal pairs", 0.0, worst_rel, 1e-4);

    double worst_abs = 0.0;
    for (int i = 0; i < 20; ++i) {
        const NormalDist a = random_normal(rng, 3.0, 0.5, 3.0);
        const NormalDist b = random_normal(rng, 3.0, 0.5, 3.0);
        const std::vector<double> xa = sample(a, rng, 100);
        const std::vector<double> xb = sample(b, rng, 100);
        const double lp = wasserstein_discrete(DiscreteMeasure::empirical(xa),
                                               DiscreteMeasure::empirical(xb), 2.0)
                              .value;
        const double oracle = std::sqrt(sorted_matching_cost(xa, xb, 2.0));
        worst_abs = std::max(worst_abs, std::abs(lp - oracle));
    }
    rec.check("max |LP W2 - sorted matching|, 20 empirical pairs of 100", 0.0, worst_abs, 1e-9);
}

void prospective_identity_8(Recorder& rec, const ReplicationOptions& opt) {
    rec.criterion(8);
    rec.check("bound_sq(1, 1, 1)", 0.585786437626905, expected_learning_bound_sq(1, 1, 1), 1e-9);
    for (double sp : {0.5, 1.0, 2.0}) {
        const double big = expected_learning_bound_sq(sp, 1.0, 1000000000);
        rec.check("bound_sq(" + std::to_string(sp).substr(0, 3) + ", 1, 1e9) / 2 sp^2", 1.0,
                  big / (2.0 * sp * sp), 1e-6);
    }

    McOptions mc;
    mc.replicates = 10000;
    mc.seed = 8008;
    mc.threads = opt.threads;
    for (double sp : {0.5, 1.0, 2.0}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
            for (std::size_t n : {1, 10, 100}) {
                const Distribution1D prior = NormalDist(1.0, sp);
                const ExpectedLearning e =
                    expected_learning_mc(prior, prior, prior, SamplingModel(sigma, n), mc);
                char name[96];
                std::snprintf(name, sizeof(name), "MC E[W2^2] vs closed form, sp=%.1f sigma=%.1f n=%zu",
                              sp, sigma, n);
                rec.check(name, expected_learning_bound_sq(sp, sigma, n), e.second_moment,
                          3.0 * e.second_moment_std_error);
            }
        }
    }
}

void figure5_9(Recorder& rec, const ReplicationOptions& opt) {
    rec.criterion(9);
    const PioneerSetup setup{NormalDist(3, 1), NormalDist(0, 3), 0.0, SamplingModel(1.0, 1)};
    std::vector<double> weights;
    for (int k = 0; k <= 10; ++k) weights.push_back(k / 10.0);
    const std::vector<std::size_t> ns{10, 50, 200};
    McOptions mc;
    mc.replicates = 2000;
    mc.seed = 5005;
    mc.quantile_nodes = 512;
    mc.threads = opt.threads;
    const std::vector<CurvePoint> curve = weight_sweep(setup, weights, ns, mc);

    for (std::size_t j = 0; j < ns.size(); ++j) {
        double worst = 0.0;  // largest decrease beyond 3 combined MC sigmas
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
            const CurvePoint& a = curve[k * ns.size() + j];
            const CurvePoint& b = curve[(k + 1) * ns.size() + j];
            const double slack = 3.0 * std::hypot(a.mc_std_error, b.mc_std_error);
            worst = std::max(worst, a.expected_learning - b.expected_learning - slack);
        }
        rec.check("E[W2] nondecreasing in w (violation beyond 3 MC sigma), n=" + std::to_string(ns[j]),
                  0.0, worst, 0.0);
        const CurvePoint& zero = curve[j];
        rec.holds("E[W2] > 0 at w=0 (3 MC sigma), n=" + std::to_string(ns[j]),
                  zero.expected_learning - 3.0 * zero.mc_std_error > 0.0);
    }
}

void properties_10(Recorder& rec) {
    rec.criterion(10);
    Rng rng(1010);

    // Metric axioms.
    double worst_sym = 0.0;
    double worst_tri = 0.0;
    double worst_self = 0.0;
    double min_value = 0.0;
    double worst_tri_q = 0.0;
    double worst_sym_q = 0.0;
    for (int i = 0; i < 200; ++i) {
        const NormalDist a = random_normal(rng);
        const NormalDist b = random_normal(rng);
        const NormalDist c = random_normal(rng);
        const double ab = w2_normal(a, b);
        worst_sym = std::max(worst_sym, std::abs(ab - w2_normal(b, a)));
        worst_tri = std::max(worst_tri, w2_normal(a, c) - ab - w2_normal(b, c));
        worst_self = std::max(worst_self, w2_normal(a, a));
        min_value = std::min(min_value, ab);
        if (i < 30) {
            const double qab = wp_quantile(a, b, 2.0);
            worst_sym_q = std::max(worst_sym_q, std::abs(qab - wp_quantile(b, a, 2.0)));
            worst_tri_q =
                std::max(worst_tri_q, wp_quantile(a, c, 2.0) - qab - wp_quantile(b, c, 2.0));
            worst_self = std::max(worst_self, wp_quantile(a, a, 2.0));
        }
    }
    rec.check("W2 nonnegativity (min value)", 0.0, std::min(min_value, 0.0), 0.0);
    rec.check("W2 symmetry (max gap)", 0.0, worst_sym, 1e-9);
    rec.check("W2 identity of indiscernibles (max self distance)", 0.0, worst_self, 1e-12);
    rec.check("W2 triangle inequality (max excess)", 0.0, std::max(worst_tri, 0.0), 1e-9);
    rec.check("quantile W2 symmetry (max gap)", 0.0, worst_sym_q, 1e-9);
    rec.check("quantile W2 triangle inequality (max excess)", 0.0, std::max(worst_tri_q, 0.0), 1e-3);

    // Affine equivariance.
    double worst_affine = 0.0;
    for (int i = 0; i < 200; ++i) {
        const NormalDist a = random_normal(rng);
        const NormalDist b = random_normal(rng);
        const double scale = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.1 + 10.0 * rng.uniform());
        const double shift = 20.0 * (rng.uniform() - 0.5);
        const auto map = [&](const NormalDist& d) {
            return NormalDist(scale * d.mu() + shift, std::abs(scale) * d.sigma());
        };
        const double base = w2_normal(a, b);
        worst_affine = std::max(worst_affine,
                                std::abs(w2_normal(map(a), map(b)) - std::abs(scale) * base) /
                                    std::max(base, 1e-300));
    }
    rec.check("W2 affine equivariance (max rel. error)", 0.0, worst_affine, 1e-9);

    // Lindley additivity along random conjugate chains.
    double worst_add = 0.0;
    for (int i = 0; i < 200; ++i) {
        const NormalDist p0 = random_normal(rng);
        const NormalDist p1 = update_conjugate(p0, Study(5.0 * rng.uniform(), 0.2 + 5.0 * rng.uniform()));
        const NormalDist p2 = update_conjugate(p1, Study(5.0 * rng.uniform(), 0.2 + 5.0 * rng.uniform()));
        worst_add = std::max(worst_add, std::abs(lindley_normal(p0, p1) + lindley_normal(p1, p2) -
                                                 lindley_normal(p0, p2)));
    }
    rec.check("Lindley additivity (max gap)", 0.0, worst_add, 1e-12);

    // KL.
    double min_kl = 0.0;
    for (int i = 0; i < 200; ++i) {
        const NormalDist a = random_normal(rng);
        const NormalDist b = random_normal(rng);
        min_kl = std::min({min_kl, kl_normal(a, b), kl_normal(b, a)});
    }
    rec.check("KL nonnegativity (min value)", 0.0, min_kl, 0.0);
    const double fwd = kl_normal(NormalDist(0, 1), NormalDist(0, 10));
    const double rev = kl_normal(NormalDist(0, 10), NormalDist(0, 1));
    rec.holds("KL asymmetry: KL(N(0,1)||N(0,10)) != KL(N(0,10)||N(0,1))", std::abs(fwd - rev) > 1.0);

    // Quadratic-loss continuity bound.
    double worst_excess = -1.0;
    for (int i = 0; i < 1000; ++i) {
        const NormalDist a = random_normal(rng);
        const NormalDist b = random_normal(rng);
        const double action = 20.0 * (rng.uniform() - 0.5);
        const double qa = quadratic_expectation(a, action);
        const double qb = quadratic_expectation(b, action);
        const double bound = w2_normal(a, b) * std::sqrt(2.0 * (qa + qb));
        worst_excess = std::max(worst_excess, std::abs(qa - qb) - bound);
    }
    rec.check("quadratic-loss continuity, 1000 instances (max excess over bound)", 0.0,
              std::max(worst_excess, 0.0), 1e-9);

    // Seed determinism across thread counts.
    McOptions mc;
    mc.replicates = 500;
    mc.seed = 99;
    mc.quantile_nodes = 256;
    const Distribution1D dm = MixtureDist({{0.4, NormalDist(0, 3)}, {0.6, NormalDist(3, 1)}});
    const Distribution1D consensus = NormalDist(3, 1);
    mc.threads = 1;
    const ExpectedLearning serial = expected_learning_mc(dm, dm, consensus, SamplingModel(1.0, 20), mc);
    mc.threads = 3;
    const ExpectedLearning parallel = expected_learning_mc(dm, dm, consensus, SamplingModel(1.0, 20), mc);
    const bool same = std::memcmp(&serial.estimate, &parallel.estimate, sizeof(double)) == 0 &&
                      std::memcmp(&serial.second_moment, &parallel.second_moment, sizeof(double)) == 0 &&
                      std::memcmp(&serial.mc_std_error, &parallel.mc_std_error, sizeof(double)) == 0;
    rec.holds("seed determinism: 1 vs 3 threads bit-identical", same);
}

}  // namespace

std::string criterion_title(int criterion) {
    switch (criterion) {
        case 1: return "illustrative scenarios: W2 and decomposition";
        case 2: return "conjugate update N(0,10) + 6.67 (5.77)";
        case 3: return "lawn-sign chain: posteriors, stepwise and end-to-end W2";
        case 4: return "comparators: KL_sym and Lindley";
        case 5: return "citizenship, normal prior: W2 = 0.27";
        case 6: return "citizenship, truncated prior: W2 = 0.34";
        case 7: return "cross-method consistency";
        case 8: return "prospective E[W2^2] identity";
        case 9: return "decision-maker weight sweep shape";
        case 10: return "property suites";
        default: return "unknown";
    }
}

std::vector<ReplicationResult> run_replication(const ReplicationOptions& options) {
    std::vector<ReplicationResult> out;
    Recorder rec(out);
    const auto wanted = [&options](std::initializer_list<int> criteria) {
        if (options.only.empty()) return true;
        for (int c : criteria) {
            if (std::find(options.only.begin(), options.only.end(), c) != options.only.end()) return true;
        }
        return false;
    };
    if (wanted({1, 4})) scenarios_1_and_4(rec, options);
    if (wanted({2})) conjugate_2(rec);
    if (wanted({3})) lawn_signs_3(rec, options);
    if (wanted({5, 6})) citizenship_5_and_6(rec);
    if (wanted({7})) cross_method_7(rec);
    if (wanted({8})) prospective_identity_8(rec, options);
    if (wanted({9})) figure5_9(rec, options);
    if (wanted({10})) properties_10(rec);
    if (!options.only.empty()) {
        std::erase_if(out, [&options](const ReplicationResult& r) {
            return std::find(options.only.begin(), options.only.end(), r.criterion) == options.only.end();
        });
    }
    std::stable_sort(out.begin(), out.end(), [](const ReplicationResult& a, const ReplicationResult& b) {
        return a.criterion < b.criterion;
    });
    return out;
}

std::string render_replication(const std::vector<ReplicationResult>& results) {
    std::ostringstream out;
    std::size_t failed = 0;
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s  C%-2d %-72s expected %-12.6g actual %-14.8g tol %.3g\n",
                      r.passed ? "PASS" : "FAIL", r.criterion, r.check_name.c_str(), r.expected,
                      r.actual, r.tolerance);
        out << line;
        if (!r.passed) ++failed;
    }
    out << results.size() - failed << "/" << results.size() << " checks passed\n";
    return out.str();
}

}  // namespace wlearn
