#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wlearn/dist.hpp"

namespace wlearn {

/// A reported estimate with its standard error; induces the normal
/// likelihood N(estimate | theta, std_error).
struct Study {
    double estimate;
    double std_error;

    Study(double estimate, double std_error);

    double precision() const { return 1.0 / (std_error * std_error); }
    friend bool operator==(const Study&, const Study&) = default;
};

/// Per-observation noise sd and sample size of a planned study.
struct SamplingModel {
    double sigma;
    std::size_t n;

    SamplingModel(double sigma, std::size_t n);

    /// Standard error of the sample mean, sigma / sqrt(n).
    double std_error() const;
    friend bool operator==(const SamplingModel&, const SamplingModel&) = default;
};

struct GridConfig {
    double lo;
    double hi;
    std::size_t nodes = 4096;

    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

inline constexpr std::size_t kDefaultGridNodes = 4096;

NormalDist update_conjugate(const NormalDist& prior, const Study& study);

/// Exact posterior of a mixture of normals: each component is updated
/// conjugately and reweighted by its marginal likelihood.
MixtureDist update_conjugate(const MixtureDist& prior, const Study& study);

/// Grid posterior proportional to prior mass times the normal likelihood.
/// A GridDensity prior is updated on its own nodes and the range arguments
/// are ignored. Otherwise TailMassError is raised when the posterior, rather
/// than the prior, may have more than kTailTolerance outside [lo, hi].
GridDensity update_grid(const Distribution1D& prior, const Study& study, double lo, double hi,
                        std::size_t nodes = kDefaultGridNodes);

/// Prior effective range (mean +/- 8 sd) unioned with estimate +/- 8 se,
/// clipped to the prior's support.
GridConfig default_grid(const Distribution1D& prior, const Study& study);

/// Dispatching update: closed form for normal and all-normal mixture priors,
/// grid quadrature for everything else (using `grid` or default_grid).
Distribution1D update(const Distribution1D& prior, const Study& study,
                      const std::optional<GridConfig>& grid = std::nullopt);

struct ChainStep {
    Study study;
    Distribution1D posterior;
};

struct PosteriorChain {
    Distribution1D prior;
    std::vector<ChainStep> steps;

    /// Belief before step k (the prior for k = 0).
    const Distribution1D& before(std::size_t k) const {
        return k == 0 ? prior : steps[k - 1].posterior;
    }
    const Distribution1D& final_posterior() const { return steps.back().posterior; }
};

PosteriorChain sequential_update(const Distribution1D& prior, std::span<const Study> studies,
                                 const std::optional<GridConfig>& grid = std::nullopt);

/// Distribution of the sample mean ybar under a normal or all-normal mixture
/// prior. Other representations throw UnsupportedError; use Monte Carlo.
Distribution1D prior_predictive(const Distribution1D& prior, const SamplingModel& model);

/// Marginal density of ybar, evaluated in log space.
double log_predictive_density(const Distribution1D& prior, const SamplingModel& model,
                              double ybar);
double predictive_density(const Distribution1D& prior, const SamplingModel& model, double ybar);

}  // namespace wlearn
