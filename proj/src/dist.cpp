#include "wlearn/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wlearn/errors.hpp"
#include "wlearn/normal_math.hpp"

namespace wlearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_scale(double mu, double sigma, const char* what) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
        throw ValidationError(std::string(what) + ": mu must be finite and sigma finite and > 0");
    }
}

// phi(z) * z, with the infinite-bound limit taken as 0.
double z_phi(double z) { return std::isinf(z) ? 0.0 : z * stdnormal::pdf(z); }

double phi_or_zero(double z) { return std::isinf(z) ? 0.0 : stdnormal::pdf(z); }

void check_probability(double t) {
    if (!(t > 0.0 && t < 1.0)) {
        throw ValidationError("quantile level must lie in the open interval (0, 1)");
    }
}

}  // namespace

// ---------------------------------------------------------------- normal

NormalDist::NormalDist(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    require_scale(mu, sigma, "normal");
}

double NormalDist::pdf(double x) const { return stdnormal::pdf((x - mu_) / sigma_) / sigma_; }

double NormalDist::log_pdf(double x) const {
    return stdnormal::log_pdf((x - mu_) / sigma_) - std::log(sigma_);
}

double NormalDist::cdf(double x) const { return stdnormal::cdf((x - mu_) / sigma_); }

double NormalDist::quantile(double t) const {
    check_probability(t);
    return mu_ + sigma_ * stdnormal::quantile(t);
}

double NormalDist::draw(Rng& rng) const {
    return mu_ + sigma_ * stdnormal::quantile(rng.uniform());
}

// ------------------------------------------------------ truncated normal

TruncatedNormalDist::TruncatedNormalDist(double mu, double sigma, double lower, double upper)
    : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
    require_scale(mu, sigma, "trunc_normal");
    if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
        throw ValidationError("trunc_normal: lower must be strictly below upper");
    }
    alpha_ = (lower - mu) / sigma;
    beta_ = (upper - mu) / sigma;
    upper_tail_ = alpha_ > 0.0;
    mass_ = upper_tail_ ? stdnormal::survival(alpha_) - stdnormal::survival(beta_)
                        : stdnormal::cdf(beta_) - stdnormal::cdf(alpha_);
    if (!(mass_ > std::numeric_limits<double>::min())) {
        throw ValidationError("trunc_normal: latent normal has no mass between the bounds");
    }
}

double TruncatedNormalDist::pdf(double x) const {
    if (x < lower_ || x > upper_) return 0.0;
    return stdnormal::pdf((x - mu_) / sigma_) / (sigma_ * mass_);
}

double TruncatedNormalDist::log_pdf(double x) const {
    if (x < lower_ || x > upper_) return -kInf;
    return stdnormal::log_pdf((x - mu_) / sigma_) - std::log(sigma_ * mass_);
}

double TruncatedNormalDist::cdf(double x) const {
    if (x <= lower_) return 0.0;
    if (x >= upper_) return 1.0;
    const double z = (x - mu_) / sigma_;
    const double value = upper_tail_ ? (stdnormal::survival(alpha_) - stdnormal::survival(z)) / mass_
                                     : (stdnormal::cdf(z) - stdnormal::cdf(alpha_)) / mass_;
    return std::clamp(value, 0.0, 1.0);
}

double TruncatedNormalDist::quantile(double t) const {
    check_probability(t);
    double z;
    if (upper_tail_) {
        z = stdnormal::survival_quantile(stdnormal::survival(alpha_) - t * mass_);
    } else {
        z = stdnormal::quantile(stdnormal::cdf(alpha_) + t * mass_);
    }
    return std::clamp(mu_ + sigma_ * z, lower_, upper_);
}

double TruncatedNormalDist::draw(Rng& rng) const { return quantile(rng.uniform()); }

Moments TruncatedNormalDist::moments() const {
    const double pa = phi_or_zero(alpha_);
    const double pb = phi_or_zero(beta_);
    const double shift = (pa - pb) / mass_;
    const double var = 1.0 + (z_phi(alpha_) - z_phi(beta_)) / mass_ - shift * shift;
    return {mu_ + sigma_ * shift, sigma_ * std::sqrt(std::max(var, 0.0))};
}

// --------------------------------------------------------------- mixture

MixtureDist::MixtureDist(std::vector<WeightedComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw ValidationError("mixture: at least one component required");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw ValidationError("mixture: every weight must be finite and > 0");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mixture: weights must sum to 1");
}

bool MixtureDist::all_normal() const {
    return std::all_of(components_.begin(), components_.end(), [](const WeightedComponent& c) {
        return std::holds_alternative<NormalDist>(c.dist);
    });
}

double MixtureDist::pdf(double x) const {
    double sum = 0.0;
    for (const auto& c : components_) {
        sum += c.weight * std::visit([x](const auto& d) { return d.pdf(x); }, c.dist);
    }
    return sum;
}

double MixtureDist::log_pdf(double x) const {
    std::vector<double> terms;
    terms.reserve(components_.size());
    double top = -kInf;
    for (const auto& c : components_) {
        const double v =
            std::log(c.weight) + std::visit([x](const auto& d) { return d.log_pdf(x); }, c.dist);
        terms.push_back(v);
        top = std::max(top, v);
    }
    if (std::isinf(top)) return top;
    double acc = 0.0;
    for (double v : terms) acc += std::exp(v - top);
    return top + std::log(acc);
}

double MixtureDist::cdf(double x) const {
    double sum = 0.0;
    for (const auto& c : components_) {
        sum += c.weight * std::visit([x](const auto& d) { return d.cdf(x); }, c.dist);
    }
    return std::min(sum, 1.0);
}

double MixtureDist::quantile(double t) const {
    check_probability(t);
    // The mixture quantile lies between the smallest and largest component
    // quantiles at the same level.
    double lo = kInf;
    double hi = -kInf;
    for (const auto& c : components_) {
        const double q = std::visit([t](const auto& d) { return d.quantile(t); }, c.dist);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    if (components_.size() == 1 || hi - lo <= 0.0) return lo;

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = cdf(x) - t;
        if (f == 0.0) return x;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double dens = pdf(x);
        double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) return next;
        x = next;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

double MixtureDist::draw(Rng& rng) const {
    const double pick = rng.uniform();
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& c : components_) {
        acc += c.weight;
        if (pick < acc) return std::visit([u](const auto& d) { return d.quantile(u); }, c.dist);
    }
    return std::visit([u](const auto& d) { return d.quantile(u); }, components_.back().dist);
}

Moments MixtureDist::moments() const {
    double mean = 0.0;
    for (const auto& c : components_) {
        mean += c.weight * std::visit([](const auto& d) { return d.moments(); }, c.dist).mean;
    }
    double var = 0.0;
    for (const auto& c : components_) {
        const Moments m = std::visit([](const auto& d) { return d.moments(); }, c.dist);
        var += c.weight * (m.sd * m.sd + (m.mean - mean) * (m.mean - mean));
    }
    return {mean, std::sqrt(var)};
}

// ------------------------------------------------------------------ grid

GridDensity::GridDensity(std::vector<double> xs, std::vector<double> ws)
    : xs_(std::move(xs)), ws_(std::move(ws)) {
    if (xs_.size() != ws_.size()) throw ValidationError("grid: xs and ws differ in length");
    if (xs_.size() < 2) throw ValidationError("grid: at least two nodes required");
    double total = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i])) throw ValidationError("grid: nodes must be finite");
        if (i > 0 && !(xs_[i] > xs_[i - 1])) {
            throw ValidationError("grid: nodes must be strictly increasing");
        }
        if (!(ws_[i] >= 0.0) || !std::isfinite(ws_[i])) {
            throw ValidationError("grid: masses must be finite and nonnegative");
        }
        total += ws_[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("grid: masses must sum to 1");
    cum_.resize(ws_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ws_.size(); ++i) {
        acc += ws_[i];
        cum_[i] = acc;
    }
    cum_.back() = 1.0;
}

double GridDensity::cell_width(std::size_t i) const {
    const std::size_t last = xs_.size() - 1;
    const double left = i == 0 ? xs_[0] : xs_[i - 1];
    const double right = i == last ? xs_[last] : xs_[i + 1];
    return 0.5 * (right - left);
}

double GridDensity::pdf(double x) const {
    if (x < xs_.front() || x > xs_.back()) return 0.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t hi = std::min<std::size_t>(it - xs_.begin(), xs_.size() - 1);
    const std::size_t lo = hi - 1;
    const double f_lo = ws_[lo] / cell_width(lo);
    const double f_hi = ws_[hi] / cell_width(hi);
    const double s = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return (1.0 - s) * f_lo + s * f_hi;
}

double GridDensity::log_pdf(double x) const {
    const double v = pdf(x);
    return v > 0.0 ? std::log(v) : -kInf;
}

double GridDensity::cdf(double x) const {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

double GridDensity::quantile(double t) const {
    check_probability(t);
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), t);
    const std::size_t i = std::min<std::size_t>(it - cum_.begin(), xs_.size() - 1);
    return xs_[i];
}

double GridDensity::draw(Rng& rng) const { return quantile(rng.uniform()); }

Moments GridDensity::moments() const {
    double mean = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) mean += ws_[i] * xs_[i];
    double var = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) var += ws_[i] * (xs_[i] - mean) * (xs_[i] - mean);
    return {mean, std::sqrt(var)};
}

// ---------------------------------------------------------- dispatchers

double pdf(const Distribution1D& d, double x) {
    return std::visit([x](const auto& v) { return v.pdf(x); }, d);
}

double log_pdf(const Distribution1D& d, double x) {
    return std::visit([x](const auto& v) { return v.log_pdf(x); }, d);
}

double cdf(const Distribution1D& d, double x) {
    return std::visit([x](const auto& v) { return v.cdf(x); }, d);
}

double quantile(const Distribution1D& d, double t) {
    return std::visit([t](const auto& v) { return v.quantile(t); }, d);
}

double draw(const Distribution1D& d, Rng& rng) {
    return std::visit([&rng](const auto& v) { return v.draw(rng); }, d);
}

std::vector<double> sample(const Distribution1D& d, Rng& rng, std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw(d, rng));
    return out;
}

Moments moments(const Distribution1D& d) {
    return std::visit([](const auto& v) { return v.moments(); }, d);
}

bool is_normal(const Distribution1D& d) { return std::holds_alternative<NormalDist>(d); }

double tail_mass(const Distribution1D& d, double lo, double hi) {
    if (const auto* g = std::get_if<GridDensity>(&d)) {
        double outside = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (g->xs()[i] < lo || g->xs()[i] > hi) outside += g->ws()[i];
        }
        return outside;
    }
    return cdf(d, lo) + (1.0 - cdf(d, hi));
}

std::pair<double, double> support(const Distribution1D& d) {
    return std::visit(
        overloaded{
            [](const NormalDist&) { return std::pair{-kInf, kInf}; },
            [](const TruncatedNormalDist& t) { return std::pair{t.lower(), t.upper()}; },
            [](const MixtureDist& m) {
                double lo = kInf;
                double hi = -kInf;
                for (const auto& c : m.components()) {
                    const auto [l, h] = std::visit(
                        overloaded{[](const NormalDist&) { return std::pair{-kInf, kInf}; },
                                   [](const TruncatedNormalDist& t) {
                                       return std::pair{t.lower(), t.upper()};
                                   }},
                        c.dist);
                    lo = std::min(lo, l);
                    hi = std::max(hi, h);
                }
                return std::pair{lo, hi};
            },
            [](const GridDensity& g) { return std::pair{g.xs().front(), g.xs().back()}; },
        },
        d);
}

std::pair<double, double> effective_range(const Distribution1D& d, double width) {
    if (const auto* g = std::get_if<GridDensity>(&d)) return {g->xs().front(), g->xs().back()};
    double lo;
    double hi;
    if (const auto* m = std::get_if<MixtureDist>(&d)) {
        // Union over components; the pooled sd can understate a narrow
        // component that sits far from the pooled mean.
        lo = kInf;
        hi = -kInf;
        for (const auto& c : m->components()) {
            const auto [l, h] = effective_range(
                std::visit([](const auto& v) { return Distribution1D{v}; }, c.dist), width);
            lo = std::min(lo, l);
            hi = std::max(hi, h);
        }
    } else {
        const Moments mom = moments(d);
        lo = mom.mean - width * mom.sd;
        hi = mom.mean + width * mom.sd;
        if (const auto* t = std::get_if<TruncatedNormalDist>(&d)) {
            // The latent scale bounds the tail decay even when truncation
            // shrinks the reported sd.
            lo = std::min(lo, t->mu() - width * t->sigma());
            hi = std::max(hi, t->mu() + width * t->sigma());
        }
    }
    const auto [s_lo, s_hi] = support(d);
    return {std::max(lo, s_lo), std::min(hi, s_hi)};
}

GridDensity to_grid(const Distribution1D& d, double lo, double hi, std::size_t nodes) {
    return to_grid(d, lo, hi, nodes, kTailTolerance);
}

GridDensity to_grid(const Distribution1D& d, double lo, double hi, std::size_t nodes,
                    double tail_tolerance) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ValidationError("to_grid: require finite lo < hi");
    }
    if (nodes < kMinGridNodes) throw ValidationError("to_grid: at least 64 nodes required");

    const double outside = tail_mass(d, lo, hi);
    if (outside > tail_tolerance) {
        throw TailMassError("to_grid: mass " + std::to_string(outside) +
                            " lies outside the requested range");
    }

    const double h = (hi - lo) / static_cast<double>(nodes - 1);
    std::vector<double> xs(nodes);
    for (std::size_t i = 0; i < nodes; ++i) xs[i] = lo + h * static_cast<double>(i);
    xs.back() = hi;
    std::vector<double> ws(nodes, 0.0);

    if (const auto* g = std::get_if<GridDensity>(&d)) {
        for (std::size_t k = 0; k < g->size(); ++k) {
            const double x = g->xs()[k];
            const double m = g->ws()[k];
            if (x < lo || x > hi) continue;
            const double pos = (x - lo) / h;
            auto i = static_cast<std::size_t>(std::floor(pos));
            if (i >= nodes - 1) {
                ws[nodes - 1] += m;
                continue;
            }
            double frac = pos - static_cast<double>(i);
            if (frac < 1e-9) frac = 0.0;
            if (frac > 1.0 - 1e-9) frac = 1.0;
            ws[i] += m * (1.0 - frac);
            ws[i + 1] += m * frac;
        }
    } else {
        for (std::size_t i = 0; i < nodes; ++i) {
            const double cell = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
            ws[i] = pdf(d, xs[i]) * cell;
        }
    }

    const double total = std::accumulate(ws.begin(), ws.end(), 0.0);
    if (!(total > 0.0)) throw DegenerateError("to_grid: no mass on the requested nodes");
    for (double& w : ws) w /= total;
    return GridDensity(std::move(xs), std::move(ws));
}

}  // namespace wlearn
