#pragma once

#include <cstddef>
#include <vector>

namespace wlearn {

/// Weighted point cloud in R^d.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<std::vector<double>> points, std::vector<double> weights);

    /// Equal weights 1/n on scalar points.
    static DiscreteMeasure empirical(const std::vector<double>& values);

    const std::vector<std::vector<double>>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return points_.size(); }
    std::size_t dimension() const { return points_.front().size(); }

private:
    std::vector<std::vector<double>> points_;
    std::vector<double> weights_;
};

/// Optimal coupling between a source and target measure, with the dual
/// potentials certifying optimality (c_ij - u_i - v_j >= 0, = 0 on support).
struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> flows;  // row-major
    std::vector<double> row_potential;
    std::vector<double> col_potential;

    double flow(std::size_t i, std::size_t j) const { return flows[i * cols + j]; }
};

struct TransportResult {
    double value;  // W_p = (optimal cost)^(1/p)
    double cost;   // sum gamma_ij |x_i - y_j|^p
    TransportPlan plan;
};

/// Exact W_p between discrete measures by the transportation simplex
/// (northwest-corner start, MODI pricing). Ground cost is the Euclidean
/// distance raised to p.
TransportResult wasserstein_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double p);

}  // namespace wlearn
