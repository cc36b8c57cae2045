#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wlearn/bayes.hpp"
#include "wlearn/dist.hpp"

namespace wlearn {

/// Consensus belief, a dissenting pioneer belief, and the weight a decision
/// maker gives the pioneer.
struct PioneerSetup {
    Distribution1D consensus;
    Distribution1D pioneer;
    double weight;
    SamplingModel model;
};

struct ExpectedLearning {
    double estimate = 0.0;      // MC mean of W2
    double mc_std_error = 0.0;  // sd(W2) / sqrt(replicates)
    double second_moment = 0.0;  // MC mean of W2^2
    double second_moment_std_error = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

struct CurvePoint {
    double w;
    std::size_t n;
    double expected_learning;
    double mc_std_error;
};

struct McOptions {
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;
    /// Quantile nodes for W2 whenever a closed form is unavailable.
    std::size_t quantile_nodes = 1024;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
};

inline constexpr std::size_t kMinReplicates = 100;

/// w * pioneer + (1 - w) * consensus, flattening nested mixtures. Weights 0
/// and 1 return the corresponding input unchanged. A grid operand forces a
/// grid result on the grid's nodes.
Distribution1D decision_maker_prior(const PioneerSetup& setup);

/// E over ybar ~ p(ybar) of W2(reference, posterior(update_prior | ybar)),
/// where theta ~ predictive_prior and ybar ~ N(theta, sigma / sqrt(n)).
/// Replicate i draws from Rng(seed, i) and the reduction runs in replicate
/// order, so the result is bit-identical for any thread count.
ExpectedLearning expected_learning_mc(const Distribution1D& predictive_prior,
                                      const Distribution1D& update_prior,
                                      const Distribution1D& reference_prior,
                                      const SamplingModel& model, const McOptions& options);

/// Closed form of E[W2^2] when all three priors equal N(mu, sigma_prior):
/// sp^2 / (s^2 / (n sp^2) + 1) + sp^2 (1 - (1 + sp^2 n / s^2)^(-1/2))^2.
/// n = 0 means no data and gives 0.
double expected_learning_bound_sq(double sigma_prior, double sigma, std::size_t n);

/// Expected learning for every (w, n) pair, weights outermost. Each point
/// predicts from and updates the decision-maker prior and measures W2
/// against the consensus. All points share options.seed (common random
/// numbers across the sweep).
std::vector<CurvePoint> weight_sweep(const PioneerSetup& setup, std::span<const double> weights,
                                     std::span<const std::size_t> ns, const McOptions& options);

}  // namespace wlearn
