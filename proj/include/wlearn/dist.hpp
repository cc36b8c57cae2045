#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "wlearn/rng.hpp"

namespace wlearn {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

/// Normal belief N(mu, sigma), parameterized by standard deviation.
class NormalDist {
public:
    NormalDist(double mu, double sigma);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    double quantile(double t) const;
    double draw(Rng& rng) const;
    Moments moments() const { return {mu_, sigma_}; }

    friend bool operator==(const NormalDist&, const NormalDist&) = default;

private:
    double mu_;
    double sigma_;
};

/// Latent N(mu, sigma) conditioned on (lower, upper). Bounds may be infinite.
class TruncatedNormalDist {
public:
    TruncatedNormalDist(double mu, double sigma, double lower, double upper);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    /// Latent normal probability of (lower, upper).
    double retained_mass() const { return mass_; }

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    double quantile(double t) const;
    double draw(Rng& rng) const;
    Moments moments() const;

    friend bool operator==(const TruncatedNormalDist& a, const TruncatedNormalDist& b) {
        return a.mu_ == b.mu_ && a.sigma_ == b.sigma_ && a.lower_ == b.lower_ &&
               a.upper_ == b.upper_;
    }

private:
    double mu_;
    double sigma_;
    double lower_;
    double upper_;
    double alpha_;  // standardized lower bound
    double beta_;   // standardized upper bound
    double mass_;
    bool upper_tail_;  // bounds sit in the right tail; work with survival functions
};

using MixtureComponent = std::variant<NormalDist, TruncatedNormalDist>;

struct WeightedComponent {
    double weight;
    MixtureComponent dist;

    friend bool operator==(const WeightedComponent&, const WeightedComponent&) = default;
};

/// Finite mixture sum_k w_k * component_k.
class MixtureDist {
public:
    explicit MixtureDist(std::vector<WeightedComponent> components);

    const std::vector<WeightedComponent>& components() const { return components_; }
    bool all_normal() const;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    double quantile(double t) const;
    double draw(Rng& rng) const;
    Moments moments() const;

    friend bool operator==(const MixtureDist&, const MixtureDist&) = default;

private:
    std::vector<WeightedComponent> components_;
};

/// Probability masses on strictly increasing nodes. The cdf is the step
/// function sum_{x_i <= x} w_i; pdf interpolates mass / cell width.
class GridDensity {
public:
    GridDensity(std::vector<double> xs, std::vector<double> ws);

    std::span<const double> xs() const { return xs_; }
    std::span<const double> ws() const { return ws_; }
    std::size_t size() const { return xs_.size(); }
    /// Width of the trapezoid cell around node i (half cells at the ends).
    double cell_width(std::size_t i) const;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    double quantile(double t) const;
    double draw(Rng& rng) const;
    Moments moments() const;

    friend bool operator==(const GridDensity& a, const GridDensity& b) {
        return a.xs_ == b.xs_ && a.ws_ == b.ws_;
    }

private:
    std::vector<double> xs_;
    std::vector<double> ws_;
    std::vector<double> cum_;
};

using Distribution1D = std::variant<NormalDist, TruncatedNormalDist, MixtureDist, GridDensity>;

double pdf(const Distribution1D& d, double x);
double log_pdf(const Distribution1D& d, double x);
double cdf(const Distribution1D& d, double x);

/// Generalized inverse inf{x : cdf(x) >= t}; throws ValidationError unless 0 < t < 1.
double quantile(const Distribution1D& d, double t);

double draw(const Distribution1D& d, Rng& rng);
std::vector<double> sample(const Distribution1D& d, Rng& rng, std::size_t count);
Moments moments(const Distribution1D& d);

/// Trapezoid discretization onto `nodes` equispaced points of [lo, hi].
/// Grid sources are re-binned by splitting each mass between its two
/// neighbouring target nodes, which preserves the mean. Throws TailMassError
/// when more than `tail_tolerance` of d lies outside [lo, hi].
GridDensity to_grid(const Distribution1D& d, double lo, double hi, std::size_t nodes,
                    double tail_tolerance);
GridDensity to_grid(const Distribution1D& d, double lo, double hi, std::size_t nodes);

/// Mass of d outside [lo, hi].
double tail_mass(const Distribution1D& d, double lo, double hi);

/// Interval carrying essentially all of d's mass: mean +/- width sds,
/// clipped to the support.
std::pair<double, double> effective_range(const Distribution1D& d, double width = 8.0);

/// Hard support bounds (possibly infinite).
std::pair<double, double> support(const Distribution1D& d);

bool is_normal(const Distribution1D& d);

inline constexpr double kTailTolerance = 1e-6;
inline constexpr std::size_t kMinGridNodes = 64;

}  // namespace wlearn
