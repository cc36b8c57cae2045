#include "wlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wlearn/errors.hpp"

namespace wlearn {

namespace {

constexpr int kPanelsPerSide = 40;

double pow_abs(double x, double p) {
    const double a = std::abs(x);
    return p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p));
}

void check_order(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("wasserstein order p must be >= 1");
}

double wp_grids(const GridDensity& a, const GridDensity& b, double p) {
    const auto xa = a.xs();
    const auto xb = b.xs();
    const auto wa = a.ws();
    const auto wb = b.ws();
    std::size_t i = 0;
    std::size_t j = 0;
    double left_a = wa[0];
    double left_b = wb[0];
    double total = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double step = std::min(left_a, left_b);
        total += step * pow_abs(xa[i] - xb[j], p);
        left_a -= step;
        left_b -= step;
        if (left_a <= left_b) {
            if (++i < xa.size()) left_a += wa[i];
        } else {
            if (++j < xb.size()) left_b += wb[j];
        }
    }
    return std::pow(std::max(total, 0.0), 1.0 / p);
}

// Cells of a node vector that need not be equispaced.
std::vector<double> cell_widths(std::span<const double> xs) {
    std::vector<double> cells(xs.size());
    const std::size_t last = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cells[i] = 0.5 * ((i == last ? xs[last] : xs[i + 1]) - (i == 0 ? xs[0] : xs[i - 1]));
    }
    return cells;
}

}  // namespace

double w2_normal(const NormalDist& a, const NormalDist& b) {
    return std::hypot(a.mu() - b.mu(), a.sigma() - b.sigma());
}

QuantileRule quantile_rule(std::size_t nodes) {
    if (nodes < kMinQuantileNodes) throw ValidationError("quantile quadrature needs >= 256 nodes");
    const std::size_t per_side = nodes / 2;
    const std::size_t base = per_side / kPanelsPerSide;
    const std::size_t extra = per_side % kPanelsPerSide;

    // Per-side node counts; leftovers go to the innermost panels.
    std::vector<std::size_t> count(kPanelsPerSide, base);
    for (std::size_t k = 0; k < extra; ++k) ++count[k];

    QuantileRule rule;
    rule.t.reserve(nodes);
    rule.weight.reserve(nodes);
    // Lower half, from the outermost panel inward so t increases.
    for (int k = kPanelsPerSide - 1; k >= 0; --k) {
        const double hi = 0.5 * std::ldexp(1.0, -k);
        const double lo = 0.5 * hi;
        const std::size_t m = count[static_cast<std::size_t>(k)];
        const double h = (hi - lo) / static_cast<double>(m);
        for (std::size_t s = 0; s < m; ++s) {
            rule.t.push_back(lo + h * (static_cast<double>(s) + 0.5));
            rule.weight.push_back(h);
        }
    }
    const std::size_t half = rule.t.size();
    for (std::size_t s = half; s-- > 0;) {
        rule.t.push_back(1.0 - rule.t[s]);
        rule.weight.push_back(rule.weight[s]);
    }
    return rule;
}

double wp_quantile(std::span<const double> a_quantiles, const Distribution1D& b, double p,
                   const QuantileRule& rule) {
    check_order(p);
    const std::size_t count = rule.t.size();
    const std::size_t outer = (count / 2) / kPanelsPerSide;
    double total = 0.0;
    double edge = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const double qb = quantile(b, rule.t[s]);
        const double qa = a_quantiles[s];
        if (!std::isfinite(qa) || !std::isfinite(qb)) {
            throw MomentError("wp_quantile: non-finite quantile in the integration range");
        }
        const double term = rule.weight[s] * pow_abs(qa - qb, p);
        total += term;
        if (s < outer || s >= count - outer) edge += term;
    }
    if (total > 0.0 && edge > 1e-3 * total) {
        throw MomentError("wp_quantile: integrand concentrates in the extreme tails; "
                          "the p-th moment may not exist");
    }
    return std::pow(total, 1.0 / p);
}

double wp_quantile(const Distribution1D& a, const Distribution1D& b, double p, std::size_t nodes) {
    check_order(p);
    const auto* ga = std::get_if<GridDensity>(&a);
    const auto* gb = std::get_if<GridDensity>(&b);
    if (ga != nullptr && gb != nullptr) return wp_grids(*ga, *gb, p);

    const QuantileRule rule = quantile_rule(nodes);
    std::vector<double> qa(rule.t.size());
    for (std::size_t s = 0; s < qa.size(); ++s) qa[s] = quantile(a, rule.t[s]);
    return wp_quantile(qa, b, p, rule);
}

double kl_normal(const NormalDist& p, const NormalDist& q) {
    const double ratio = (p.sigma() * p.sigma()) / (q.sigma() * q.sigma());
    const double dm = (q.mu() - p.mu()) / q.sigma();
    return std::max(0.0, 0.5 * (dm * dm + ratio - std::log(ratio) - 1.0));
}

double kl_grid(const GridDensity& p, const GridDensity& q) {
    if (p.size() != q.size()) throw ValidationError("kl_grid: grids must share their nodes");
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = p.xs()[i];
        const double b = q.xs()[i];
        if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
            throw ValidationError("kl_grid: grids must share their nodes");
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pm = p.ws()[i];
        if (pm <= 0.0) continue;
        const double qm = q.ws()[i];
        if (qm <= 0.0) {
            throw AbsoluteContinuityError("kl_grid: p has mass where q has none");
        }
        total += pm * std::log(pm / qm);
    }
    return std::max(total, 0.0);
}

double lindley_normal(const NormalDist& prior, const NormalDist& post) {
    return std::log(prior.sigma()) - std::log(post.sigma());
}

double lindley_grid(const GridDensity& prior, const GridDensity& post) {
    auto neg_entropy = [](const GridDensity& g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double m = g.ws()[i];
            if (m <= 0.0) continue;
            acc += m * std::log(m / g.cell_width(i));
        }
        return acc;
    };
    return neg_entropy(post) - neg_entropy(prior);
}

double log_surprisal(const Distribution1D& prior, const SamplingModel& model, double ybar) {
    return -log_predictive_density(prior, model, ybar);
}

double surprisal(const Distribution1D& prior, const SamplingModel& model, double ybar) {
    return std::exp(log_surprisal(prior, model, ybar));
}

double quadratic_expectation(const Distribution1D& d, double action) {
    const Moments m = moments(d);
    return (m.mean - action) * (m.mean - action) + m.sd * m.sd;
}

GridDensity discretize_on(const Distribution1D& d, std::span<const double> xs) {
    if (xs.size() < 2) throw ValidationError("discretize_on: at least two nodes required");
    const double outside = tail_mass(d, xs.front(), xs.back());
    if (outside > kTailTolerance) {
        throw TailMassError("discretize_on: distribution has mass outside the nodes");
    }
    if (const auto* g = std::get_if<GridDensity>(&d)) {
        if (std::equal(g->xs().begin(), g->xs().end(), xs.begin(), xs.end())) return *g;
        throw ValidationError("discretize_on: grid sources must already sit on the nodes");
    }
    const std::vector<double> cells = cell_widths(xs);
    std::vector<double> ws(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ws[i] = pdf(d, xs[i]) * cells[i];
    const double total = std::accumulate(ws.begin(), ws.end(), 0.0);
    if (!(total > 0.0)) throw DegenerateError("discretize_on: no mass on the nodes");
    for (double& w : ws) w /= total;
    return GridDensity(std::vector<double>(xs.begin(), xs.end()), std::move(ws));
}

namespace {

// Both arguments on one node set, or nullopt when no common discretization
// exists without re-binning an existing grid.
std::optional<std::pair<GridDensity, GridDensity>> shared_grid(const Distribution1D& prior,
                                                               const Distribution1D& post,
                                                               std::size_t nodes) {
    const auto* gp = std::get_if<GridDensity>(&prior);
    const auto* gq = std::get_if<GridDensity>(&post);
    try {
        if (gp != nullptr && gq != nullptr) {
            if (!std::equal(gp->xs().begin(), gp->xs().end(), gq->xs().begin(), gq->xs().end())) {
                return std::nullopt;
            }
            return std::pair{*gp, *gq};
        }
        if (gp != nullptr) return std::pair{*gp, discretize_on(post, gp->xs())};
        if (gq != nullptr) return std::pair{discretize_on(prior, gq->xs()), *gq};
        const auto [a_lo, a_hi] = effective_range(prior, 10.0);
        const auto [b_lo, b_hi] = effective_range(post, 10.0);
        const double lo = std::min(a_lo, b_lo);
        const double hi = std::max(a_hi, b_hi);
        return std::pair{to_grid(prior, lo, hi, nodes), to_grid(post, lo, hi, nodes)};
    } catch (const TailMassError&) {
        return std::nullopt;
    }
}

std::optional<double> try_kl(const GridDensity& p, const GridDensity& q) {
    try {
        return kl_grid(p, q);
    } catch (const AbsoluteContinuityError&) {
        return std::nullopt;
    }
}

}  // namespace

LearningReport learning_report(const Distribution1D& prior, const Distribution1D& post,
                               std::size_t nodes) {
    LearningReport r;
    const Moments mp = moments(prior);
    const Moments mq = moments(post);
    r.mean_shift_sq = (mq.mean - mp.mean) * (mq.mean - mp.mean);
    r.sd_shift_sq = (mq.sd - mp.sd) * (mq.sd - mp.sd);

    const auto* np = std::get_if<NormalDist>(&prior);
    const auto* nq = std::get_if<NormalDist>(&post);
    if (np != nullptr && nq != nullptr) {
        r.w2 = w2_normal(*np, *nq);
        r.decomposition_exact = true;
        r.kl_forward = kl_normal(*nq, *np);
        r.kl_reverse = kl_normal(*np, *nq);
        r.lindley = lindley_normal(*np, *nq);
    } else {
        r.w2 = wp_quantile(prior, post, 2.0, nodes);
        if (const auto grids = shared_grid(prior, post, nodes)) {
            const auto& [gp, gq] = *grids;
            r.kl_forward = try_kl(gq, gp);
            r.kl_reverse = try_kl(gp, gq);
            r.lindley = lindley_grid(gp, gq);
        }
    }
    if (r.kl_forward && r.kl_reverse) r.kl_sym = *r.kl_forward + *r.kl_reverse;
    r.normalized_w2 = mp.sd > 0.0 ? r.w2 / mp.sd : std::numeric_limits<double>::infinity();
    return r;
}

}  // namespace wlearn
