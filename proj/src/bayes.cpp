#include "wlearn/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "wlearn/errors.hpp"
#include "wlearn/normal_math.hpp"

namespace wlearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
    double top = -kInf;
    for (double x : xs) top = std::max(top, x);
    if (std::isinf(top)) return top;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - top);
    return top + std::log(acc);
}

// log N(y | mean, sd)
double normal_log_density(double y, double mean, double sd) {
    return stdnormal::log_pdf((y - mean) / sd) - std::log(sd);
}

// log of integral N(y | theta, se) * TN(theta) dtheta. The product of a
// truncated normal prior and a normal likelihood is a truncated normal with
// conjugate latent parameters, so the evidence is the untruncated evidence
// times the ratio of retained latent masses.
double truncated_log_evidence(const TruncatedNormalDist& prior, double y, double se) {
    const double var = prior.sigma() * prior.sigma() + se * se;
    const double base = normal_log_density(y, prior.mu(), std::sqrt(var));
    const NormalDist post = update_conjugate(NormalDist(prior.mu(), prior.sigma()), Study(y, se));
    const TruncatedNormalDist latent(post.mu(), post.sigma(), prior.lower(), prior.upper());
    return base + std::log(latent.retained_mass()) - std::log(prior.retained_mass());
}

double component_log_evidence(const MixtureComponent& c, double y, double se) {
    if (const auto* n = std::get_if<NormalDist>(&c)) {
        return normal_log_density(y, n->mu(), std::sqrt(n->sigma() * n->sigma() + se * se));
    }
    return truncated_log_evidence(std::get<TruncatedNormalDist>(c), y, se);
}

}  // namespace

Study::Study(double estimate_, double std_error_) : estimate(estimate_), std_error(std_error_) {
    if (!std::isfinite(estimate) || !std::isfinite(std_error) || !(std_error > 0.0)) {
        throw ValidationError("study: estimate must be finite and std_error finite and > 0");
    }
}

SamplingModel::SamplingModel(double sigma_, std::size_t n_) : sigma(sigma_), n(n_) {
    if (!std::isfinite(sigma) || !(sigma > 0.0)) {
        throw ValidationError("sampling model: sigma must be finite and > 0");
    }
    if (n < 1) throw ValidationError("sampling model: n must be at least 1");
}

double SamplingModel::std_error() const { return sigma / std::sqrt(static_cast<double>(n)); }

NormalDist update_conjugate(const NormalDist& prior, const Study& study) {
    const double prior_prec = 1.0 / (prior.sigma() * prior.sigma());
    const double data_prec = study.precision();
    const double post_prec = prior_prec + data_prec;
    const double mean = (prior_prec * prior.mu() + data_prec * study.estimate) / post_prec;
    return NormalDist(mean, std::sqrt(1.0 / post_prec));
}

MixtureDist update_conjugate(const MixtureDist& prior, const Study& study) {
    if (!prior.all_normal()) {
        throw UnsupportedError("conjugate mixture update needs all-normal components");
    }
    const auto& comps = prior.components();
    std::vector<double> log_w(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        log_w[k] = std::log(comps[k].weight) +
                   component_log_evidence(comps[k].dist, study.estimate, study.std_error);
    }
    const double norm = log_sum_exp(log_w);
    std::vector<WeightedComponent> out;
    out.reserve(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const double w = std::exp(log_w[k] - norm);
        if (!(w > 0.0)) continue;  // underflowed components carry no posterior mass
        out.push_back({w, update_conjugate(std::get<NormalDist>(comps[k].dist), study)});
    }
    double total = 0.0;
    for (const auto& c : out) total += c.weight;
    for (auto& c : out) c.weight /= total;
    return MixtureDist(std::move(out));
}

GridDensity update_grid(const Distribution1D& prior, const Study& study, double lo, double hi,
                        std::size_t nodes) {
    const bool on_nodes = std::holds_alternative<GridDensity>(prior);
    const GridDensity base =
        on_nodes ? std::get<GridDensity>(prior) : to_grid(prior, lo, hi, nodes, 1.0);
    const auto xs = base.xs();
    const auto ws = base.ws();

    std::vector<double> log_like(xs.size(), -kInf);
    double top = -kInf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ws[i] <= 0.0) continue;
        log_like[i] = stdnormal::log_pdf((study.estimate - xs[i]) / study.std_error);
        top = std::max(top, log_like[i]);
    }
    if (std::isinf(top)) throw DegenerateError("update_grid: prior has no mass on the grid");

    std::vector<double> post(xs.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ws[i] <= 0.0) continue;
        post[i] = ws[i] * std::exp(log_like[i] - top);
        total += post[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DegenerateError("update_grid: posterior mass underflowed");
    }
    if (!on_nodes) {
        // Posterior mass lost outside the grid is at most the prior tail mass
        // times the largest likelihood there, relative to the evidence.
        const double z = study.estimate;
        const double se = study.std_error;
        const double lo_peak = stdnormal::log_pdf(z < lo ? 0.0 : (z - lo) / se);
        const double hi_peak = stdnormal::log_pdf(z > hi ? 0.0 : (z - hi) / se);
        const double lost = cdf(prior, lo) * std::exp(lo_peak - top) +
                            (1.0 - cdf(prior, hi)) * std::exp(hi_peak - top);
        if (lost > kTailTolerance * total) {
            throw TailMassError("update_grid: posterior mass outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] may exceed the tail tolerance");
        }
    }
    for (double& w : post) w /= total;
    return GridDensity(std::vector<double>(xs.begin(), xs.end()), std::move(post));
}

GridConfig default_grid(const Distribution1D& prior, const Study& study) {
    const auto [p_lo, p_hi] = effective_range(prior);
    const auto [s_lo, s_hi] = support(prior);
    double lo = std::min(p_lo, study.estimate - 8.0 * study.std_error);
    double hi = std::max(p_hi, study.estimate + 8.0 * study.std_error);
    lo = std::max(lo, s_lo);
    hi = std::min(hi, s_hi);
    return {lo, hi, kDefaultGridNodes};
}

Distribution1D update(const Distribution1D& prior, const Study& study,
                      const std::optional<GridConfig>& grid) {
    if (const auto* n = std::get_if<NormalDist>(&prior)) return update_conjugate(*n, study);
    if (const auto* m = std::get_if<MixtureDist>(&prior); m != nullptr && m->all_normal()) {
        MixtureDist post = update_conjugate(*m, study);
        if (post.components().size() == 1) return std::get<NormalDist>(post.components()[0].dist);
        return post;
    }
    const GridConfig cfg = grid ? *grid : default_grid(prior, study);
    return update_grid(prior, study, cfg.lo, cfg.hi, cfg.nodes);
}

PosteriorChain sequential_update(const Distribution1D& prior, std::span<const Study> studies,
                                 const std::optional<GridConfig>& grid) {
    if (studies.empty()) throw ValidationError("sequential_update: at least one study required");
    PosteriorChain chain{prior, {}};
    chain.steps.reserve(studies.size());
    for (const Study& s : studies) {
        const Distribution1D& current = chain.steps.empty() ? chain.prior : chain.final_posterior();
        chain.steps.push_back({s, update(current, s, grid)});
    }
    return chain;
}

Distribution1D prior_predictive(const Distribution1D& prior, const SamplingModel& model) {
    const double se2 = model.std_error() * model.std_error();
    auto widen = [se2](const NormalDist& n) {
        return NormalDist(n.mu(), std::sqrt(n.sigma() * n.sigma() + se2));
    };
    if (const auto* n = std::get_if<NormalDist>(&prior)) return widen(*n);
    if (const auto* m = std::get_if<MixtureDist>(&prior); m != nullptr && m->all_normal()) {
        std::vector<WeightedComponent> comps;
        for (const auto& c : m->components()) {
            comps.push_back({c.weight, widen(std::get<NormalDist>(c.dist))});
        }
        return MixtureDist(std::move(comps));
    }
    throw UnsupportedError(
        "prior_predictive: closed form needs a normal or all-normal mixture prior; "
        "simulate ybar by Monte Carlo instead");
}

double log_predictive_density(const Distribution1D& prior, const SamplingModel& model,
                              double ybar) {
    const double se = model.std_error();
    if (const auto* n = std::get_if<NormalDist>(&prior)) {
        return component_log_evidence(*n, ybar, se);
    }
    if (const auto* t = std::get_if<TruncatedNormalDist>(&prior)) {
        return component_log_evidence(*t, ybar, se);
    }
    if (const auto* m = std::get_if<MixtureDist>(&prior)) {
        std::vector<double> terms;
        for (const auto& c : m->components()) {
            terms.push_back(std::log(c.weight) + component_log_evidence(c.dist, ybar, se));
        }
        return log_sum_exp(terms);
    }
    const auto& g = std::get<GridDensity>(prior);
    std::vector<double> terms;
    terms.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.ws()[i] <= 0.0) continue;
        terms.push_back(std::log(g.ws()[i]) + normal_log_density(ybar, g.xs()[i], se));
    }
    return log_sum_exp(terms);
}

double predictive_density(const Distribution1D& prior, const SamplingModel& model, double ybar) {
    return std::exp(log_predictive_density(prior, model, ybar));
}

}  // namespace wlearn
