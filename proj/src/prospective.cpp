#include "wlearn/prospective.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <variant>

#include "wlearn/errors.hpp"
#include "wlearn/metrics.hpp"
#include "wlearn/normal_math.hpp"

namespace wlearn {

namespace {

void append_components(const Distribution1D& d, double scale,
                       std::vector<WeightedComponent>& out) {
    if (const auto* n = std::get_if<NormalDist>(&d)) {
        out.push_back({scale, *n});
    } else if (const auto* t = std::get_if<TruncatedNormalDist>(&d)) {
        out.push_back({scale, *t});
    } else {
        for (const auto& c : std::get<MixtureDist>(d).components()) {
            out.push_back({scale * c.weight, c.dist});
        }
    }
}

// W2 from a fixed reference to the posterior of one replicate.
class W2Evaluator {
public:
    W2Evaluator(const Distribution1D& reference, std::size_t nodes)
        : reference_(reference),
          normal_ref_(std::get_if<NormalDist>(&reference_)),
          rule_(quantile_rule(nodes)),
          ref_quantiles_(rule_.t.size()) {
        for (std::size_t s = 0; s < rule_.t.size(); ++s) {
            ref_quantiles_[s] = quantile(reference_, rule_.t[s]);
        }
    }

    W2Evaluator(const W2Evaluator&) = delete;
    W2Evaluator& operator=(const W2Evaluator&) = delete;

    double operator()(const Distribution1D& posterior) const {
        if (normal_ref_ != nullptr) {
            if (const auto* np = std::get_if<NormalDist>(&posterior)) {
                return w2_normal(*normal_ref_, *np);
            }
        }
        if (std::holds_alternative<GridDensity>(reference_) &&
            std::holds_alternative<GridDensity>(posterior)) {
            return wp_quantile(reference_, posterior, 2.0);
        }
        return wp_quantile(ref_quantiles_, posterior, 2.0, rule_);
    }

private:
    Distribution1D reference_;
    const NormalDist* normal_ref_;
    QuantileRule rule_;
    std::vector<double> ref_quantiles_;
};

}  // namespace

Distribution1D decision_maker_prior(const PioneerSetup& setup) {
    const double w = setup.weight;
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("pioneer weight must lie in [0, 1]");
    if (w == 0.0) return setup.consensus;
    if (w == 1.0) return setup.pioneer;

    const auto* gp = std::get_if<GridDensity>(&setup.pioneer);
    const auto* gc = std::get_if<GridDensity>(&setup.consensus);
    if (gp != nullptr || gc != nullptr) {
        // Put both operands on the node set of one grid and mix the masses.
        const GridDensity& nodes = gp != nullptr ? *gp : *gc;
        const GridDensity p = discretize_on(setup.pioneer, nodes.xs());
        const GridDensity c = discretize_on(setup.consensus, nodes.xs());
        std::vector<double> ws(nodes.size());
        for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = w * p.ws()[i] + (1.0 - w) * c.ws()[i];
        return GridDensity(std::vector<double>(nodes.xs().begin(), nodes.xs().end()),
                           std::move(ws));
    }

    std::vector<WeightedComponent> comps;
    append_components(setup.pioneer, w, comps);
    append_components(setup.consensus, 1.0 - w, comps);
    return MixtureDist(std::move(comps));
}

ExpectedLearning expected_learning_mc(const Distribution1D& predictive_prior,
                                      const Distribution1D& update_prior,
                                      const Distribution1D& reference_prior,
                                      const SamplingModel& model, const McOptions& options) {
    if (options.replicates < kMinReplicates) {
        throw ValidationError("expected_learning_mc: at least 100 replicates required");
    }
    const std::size_t reps = options.replicates;
    const double se = model.std_error();
    const W2Evaluator distance(reference_prior, options.quantile_nodes);

    std::vector<double> values(reps);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(options.seed, i);
            const double theta = draw(predictive_prior, rng);
            const double ybar = theta + se * stdnormal::quantile(rng.uniform());
            values[i] = distance(update(update_prior, Study(ybar, se)));
        }
    };

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::size_t>(reps, 64)));
    if (threads == 1) {
        run(0, reps);
    } else {
        // Exceptions from worker threads are rethrown after join; replicate
        // failures are never skipped.
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        const std::size_t chunk = (reps + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(reps, t * chunk);
            const std::size_t end = std::min(reps, begin + chunk);
            pool.emplace_back([&, t, begin, end] {
                try {
                    run(begin, end);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : values) {
        sum += v;
        sum_sq += v * v;
    }
    const double count = static_cast<double>(reps);
    const double mean = sum / count;
    const double mean_sq = sum_sq / count;
    double var = 0.0;
    double var_sq = 0.0;
    for (double v : values) {
        var += (v - mean) * (v - mean);
        var_sq += (v * v - mean_sq) * (v * v - mean_sq);
    }
    var /= count - 1.0;
    var_sq /= count - 1.0;

    ExpectedLearning out;
    out.estimate = mean;
    out.mc_std_error = std::sqrt(var / count);
    out.second_moment = mean_sq;
    out.second_moment_std_error = std::sqrt(var_sq / count);
    out.replicates = reps;
    out.seed = options.seed;
    return out;
}

double expected_learning_bound_sq(double sigma_prior, double sigma, std::size_t n) {
    if (!(sigma_prior > 0.0) || !(sigma > 0.0)) {
        throw ValidationError("expected_learning_bound_sq: scales must be > 0");
    }
    if (n == 0) return 0.0;
    const double sp2 = sigma_prior * sigma_prior;
    const double ratio = sp2 * static_cast<double>(n) / (sigma * sigma);  // prior / data variance
    const double mean_term = sp2 / (1.0 / ratio + 1.0);
    const double shrink = 1.0 - 1.0 / std::sqrt(1.0 + ratio);
    return mean_term + sp2 * shrink * shrink;
}

std::vector<CurvePoint> weight_sweep(const PioneerSetup& setup, std::span<const double> weights,
                                     std::span<const std::size_t> ns, const McOptions& options) {
    if (weights.empty() || ns.empty()) throw ValidationError("weight_sweep: empty weight or n list");
    std::vector<CurvePoint> out;
    out.reserve(weights.size() * ns.size());
    for (double w : weights) {
        PioneerSetup at_w = setup;
        at_w.weight = w;
        const Distribution1D dm = decision_maker_prior(at_w);
        for (std::size_t n : ns) {
            const SamplingModel model(setup.model.sigma, n);
            const ExpectedLearning e = expected_learning_mc(dm, dm, setup.consensus, model, options);
            out.push_back({w, n, e.estimate, e.mc_std_error});
        }
    }
    return out;
}

}  // namespace wlearn
