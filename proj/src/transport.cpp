#include "wlearn/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wlearn/errors.hpp"

namespace wlearn {

DiscreteMeasure::DiscreteMeasure(std::vector<std::vector<double>> points,
                                 std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw ValidationError("discrete measure: no points");
    if (points_.size() != weights_.size()) {
        throw ValidationError("discrete measure: points and weights differ in length");
    }
    const std::size_t dim = points_.front().size();
    if (dim == 0) throw ValidationError("discrete measure: points need dimension >= 1");
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].size() != dim) throw ValidationError("discrete measure: mixed dimensions");
        for (double x : points_[i]) {
            if (!std::isfinite(x)) throw ValidationError("discrete measure: non-finite coordinate");
        }
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
            throw ValidationError("discrete measure: weights must be > 0");
        }
        total += weights_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("discrete measure: weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::empirical(const std::vector<double>& values) {
    std::vector<std::vector<double>> pts;
    pts.reserve(values.size());
    for (double v : values) pts.push_back({v});
    const double w = values.empty() ? 0.0 : 1.0 / static_cast<double>(values.size());
    std::vector<double> ws(values.size(), w);
    // Rounding of n * (1/n) can miss 1 by a few ulps; absorb it in the last weight.
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) acc += ws[i];
    if (!ws.empty()) ws.back() = 1.0 - acc;
    return DiscreteMeasure(std::move(pts), std::move(ws));
}

namespace {

class TransportSimplex {
public:
    TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                     std::vector<double> cost)
        : m_(supply.size()),
          n_(demand.size()),
          supply_(std::move(supply)),
          demand_(std::move(demand)),
          cost_(std::move(cost)),
          flow_(m_ * n_, 0.0),
          basic_(m_ * n_, 0),
          u_(m_),
          v_(n_) {}

    void solve() {
        northwest_corner();
        double scale = 0.0;
        for (double c : cost_) scale = std::max(scale, std::abs(c));
        const double tol = 1e-12 * std::max(scale, 1.0);
        const std::size_t max_iter = 50 * (m_ + n_) * (m_ + n_) + 1000;
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            compute_potentials();
            std::size_t enter = kNone;
            double best = -tol;
            for (std::size_t i = 0; i < m_; ++i) {
                for (std::size_t j = 0; j < n_; ++j) {
                    const std::size_t c = i * n_ + j;
                    if (basic_[c]) continue;
                    const double reduced = cost_[c] - u_[i] - v_[j];
                    if (reduced < best) {
                        best = reduced;
                        enter = c;
                    }
                }
            }
            if (enter == kNone) return;
            pivot(enter);
        }
        throw NumericError("wasserstein_discrete: transportation simplex did not converge");
    }

    TransportPlan plan() const {
        return TransportPlan{m_, n_, flow_, u_, v_};
    }

    double total_cost() const {
        double acc = 0.0;
        for (std::size_t c = 0; c < flow_.size(); ++c) acc += flow_[c] * cost_[c];
        return acc;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    // Exactly m + n - 1 basic cells: every step retires one row or one column.
    void northwest_corner() {
        std::vector<double> s = supply_;
        std::vector<double> d = demand_;
        std::size_t i = 0;
        std::size_t j = 0;
        while (true) {
            const std::size_t c = i * n_ + j;
            const double x = std::min(s[i], d[j]);
            basic_[c] = 1;
            flow_[c] = x;
            s[i] -= x;
            d[j] -= x;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (j == n_ - 1 || (i < m_ - 1 && s[i] <= d[j])) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    // Node ids: rows 0..m-1, columns m..m+n-1. Basic cells are tree edges.
    void build_adjacency() {
        adj_.assign(m_ + n_, {});
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (basic_[i * n_ + j]) {
                    adj_[i].push_back(m_ + j);
                    adj_[m_ + j].push_back(i);
                }
            }
        }
    }

    void compute_potentials() {
        build_adjacency();
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> queue;
        queue.reserve(m_ + n_);
        // The basis tree spans every node, so one root suffices.
        u_[0] = 0.0;
        seen[0] = 1;
        queue.push_back(0);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t node = queue[head];
            for (std::size_t next : adj_[node]) {
                if (seen[next]) continue;
                seen[next] = 1;
                if (node < m_) {
                    const std::size_t j = next - m_;
                    v_[j] = cost_[node * n_ + j] - u_[node];
                } else {
                    const std::size_t j = node - m_;
                    u_[next] = cost_[next * n_ + j] - v_[j];
                }
                queue.push_back(next);
            }
        }
    }

    void pivot(std::size_t enter) {
        const std::size_t ei = enter / n_;
        const std::size_t ej = enter % n_;

        // Tree path from row ei to column ej.
        std::vector<std::size_t> parent(m_ + n_, kNone);
        std::vector<std::size_t> queue{ei};
        parent[ei] = ei;
        for (std::size_t head = 0; head < queue.size() && parent[m_ + ej] == kNone; ++head) {
            const std::size_t node = queue[head];
            for (std::size_t next : adj_[node]) {
                if (parent[next] != kNone) continue;
                parent[next] = node;
                queue.push_back(next);
            }
        }

        // Walk from the column back to the row; edge signs alternate -, +, -, ...
        std::vector<std::size_t> cycle;
        for (std::size_t node = m_ + ej; node != ei; node = parent[node]) {
            const std::size_t prev = parent[node];
            const std::size_t i = node < m_ ? node : prev;
            const std::size_t j = node < m_ ? prev - m_ : node - m_;
            cycle.push_back(i * n_ + j);
        }

        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = kNone;
        for (std::size_t k = 0; k < cycle.size(); k += 2) {
            if (flow_[cycle[k]] < theta) {
                theta = flow_[cycle[k]];
                leave = cycle[k];
            }
        }
        flow_[enter] = theta;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            double& f = flow_[cycle[k]];
            f += (k % 2 == 0) ? -theta : theta;
            if (f < 0.0) f = 0.0;
        }
        flow_[leave] = 0.0;
        basic_[leave] = 0;
        basic_[enter] = 1;
    }

    std::size_t m_;
    std::size_t n_;
    std::vector<double> supply_;
    std::vector<double> demand_;
    std::vector<double> cost_;
    std::vector<double> flow_;
    std::vector<char> basic_;
    std::vector<double> u_;
    std::vector<double> v_;
    std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace

TransportResult wasserstein_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("wasserstein order p must be >= 1");
    if (mu.dimension() != nu.dimension()) {
        throw ValidationError("wasserstein_discrete: dimension mismatch");
    }
    const std::size_t m = mu.size();
    const std::size_t n = nu.size();
    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < mu.dimension(); ++k) {
                const double diff = mu.points()[i][k] - nu.points()[j][k];
                sq += diff * diff;
            }
            cost[i * n + j] = p == 2.0 ? sq : std::pow(std::sqrt(sq), p);
        }
    }
    TransportSimplex lp(mu.weights(), nu.weights(), std::move(cost));
    lp.solve();
    const double total = std::max(lp.total_cost(), 0.0);
    return {std::pow(total, 1.0 / p), total, lp.plan()};
}

}  // namespace wlearn
