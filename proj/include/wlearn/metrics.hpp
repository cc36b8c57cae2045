#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wlearn/bayes.hpp"
#include "wlearn/dist.hpp"

namespace wlearn {

/// Learning between one prior and one posterior. KL and Lindley entries are
/// empty when they cannot be computed on the given representations (for
/// example KL(normal || truncated) is infinite).
struct LearningReport {
    double w2 = 0.0;
    double mean_shift_sq = 0.0;
    double sd_shift_sq = 0.0;
    double normalized_w2 = 0.0;  // w2 / prior sd
    std::optional<double> kl_forward;  // KL(posterior || prior), nats
    std::optional<double> kl_reverse;  // KL(prior || posterior), nats
    std::optional<double> kl_sym;      // kl_forward + kl_reverse
    std::optional<double> lindley;     // signed, log(sd_prior / sd_post) for normals
    bool decomposition_exact = false;
};

/// Closed-form W2 between normals: sqrt(dmu^2 + dsigma^2).
double w2_normal(const NormalDist& a, const NormalDist& b);

/// Midpoint rule on (0, 1) with panels [2^-(k+1), 2^-k] / 2 refined
/// geometrically toward both endpoints.
struct QuantileRule {
    std::vector<double> t;
    std::vector<double> weight;
};

inline constexpr std::size_t kDefaultQuantileNodes = 4096;
inline constexpr std::size_t kMinQuantileNodes = 256;

QuantileRule quantile_rule(std::size_t nodes);

/// (int_0^1 |F^-1(t) - G^-1(t)|^p dt)^(1/p). Exact when both arguments are
/// grids; otherwise quadrature with quantile_rule(nodes). Throws MomentError
/// if the integrand is dominated by the outermost panels.
double wp_quantile(const Distribution1D& a, const Distribution1D& b, double p,
                   std::size_t nodes = kDefaultQuantileNodes);

/// Same integral against precomputed quantiles of `a` on `rule`.
double wp_quantile(std::span<const double> a_quantiles, const Distribution1D& b, double p,
                   const QuantileRule& rule);

/// KL(p || q) for normals, nats.
double kl_normal(const NormalDist& p, const NormalDist& q);

/// sum p ln(p / q) on identical grids. Throws AbsoluteContinuityError when p
/// has mass where q has none and ValidationError when the nodes differ.
double kl_grid(const GridDensity& p, const GridDensity& q);

/// ln(sigma_prior) - ln(sigma_post); positive when uncertainty shrinks.
double lindley_normal(const NormalDist& prior, const NormalDist& post);

/// E_post[ln post] - E_prior[ln prior] with densities mass / cell width.
/// Zero-mass nodes contribute nothing.
double lindley_grid(const GridDensity& prior, const GridDensity& post);

/// 1 / p(ybar) under the prior predictive. Overflows to +inf in the far tail;
/// log_surprisal stays finite.
double surprisal(const Distribution1D& prior, const SamplingModel& model, double ybar);
double log_surprisal(const Distribution1D& prior, const SamplingModel& model, double ybar);

/// E_d[(action - theta)^2] = (mean - action)^2 + sd^2.
double quadratic_expectation(const Distribution1D& d, double action);

/// Discretize d onto the given nodes (trapezoid cells); TailMassError if d
/// has more than kTailTolerance outside them.
GridDensity discretize_on(const Distribution1D& d, std::span<const double> xs);

LearningReport learning_report(const Distribution1D& prior, const Distribution1D& post,
                               std::size_t nodes = kDefaultQuantileNodes);

}  // namespace wlearn
