#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obkm/matrix.hpp"

namespace obkm {

enum class DistanceMode { euclidean, squared_euclidean };

inline std::string_view distance_mode_name(DistanceMode m) {
    return m == DistanceMode::euclidean ? "euclidean" : "squared_euclidean";
}

inline std::optional<DistanceMode> distance_mode_from_name(std::string_view s) {
    if (s == "euclidean") return DistanceMode::euclidean;
    if (s == "squared_euclidean") return DistanceMode::squared_euclidean;
    return std::nullopt;
}

struct Hyperparams {
    std::size_t k = 300;
    double alpha = 0.6;
    double beta = 0.07;
    DistanceMode distance = DistanceMode::euclidean;

    void validate() const {
        if (k < 1) throw std::invalid_argument("Hyperparams: k must be >= 1");
        if (!(alpha > 0.0) || alpha > 1.0)
            throw std::invalid_argument("Hyperparams: alpha must be in (0, 1]");
        if (!std::isfinite(beta)) throw std::invalid_argument("Hyperparams: beta must be finite");
    }
};

struct AssignmentResult {
    std::size_t cluster = 0;
    double penalized_distance = 0.0; // raw distance plus the winning cluster's balance weight
    double raw_distance = 0.0;
};

// Online balanced k-means state: k centroids with per-cluster assignment
// counts and balance weights. One point streams in at a time via step():
//
//   1. assign to the cluster minimizing  d(x, mu_j) + w_j
//   2. pull the winning centroid:        mu_i <- alpha*x + (1-alpha)*mu_i,
//      and increment its count
//   3. recompute every balance weight:   w_i = beta * (n_i - E[n]) / sqrt(V[n])
//
// The weight is a beta-scaled z-score of the cluster counts: positive for
// over-full clusters, which the assignment rule then penalizes, steering the
// stream toward equally sized clusters. When the count variance V[n] falls
// below kVarianceEpsilon all weights are zero and the update degenerates to
// plain online k-means. The state is order-dependent and must be mutated
// sequentially; reads (point_loss, assign, inference) are const.
class ClusterModel {
public:
    static constexpr double kVarianceEpsilon = 1e-12;

    // Seeds the k centroids from the given points (one per cluster), counts = 1.
    ClusterModel(const Hyperparams& hp, const Matrix& seed_points)
        : hp_(hp), dim_(seed_points.cols()) {
        hp_.validate();
        if (seed_points.rows() != hp_.k)
            throw std::invalid_argument("ClusterModel: need exactly k seed points, got " +
                                        std::to_string(seed_points.rows()));
        if (dim_ < 2)
            throw std::invalid_argument("ClusterModel: dimension must be >= 2");
        centroids_ = seed_points.data();
        counts_.assign(hp_.k, 1);
        weights_.assign(hp_.k, 0.0);
        mean_count_ = 1.0;
        var_count_ = 0.0;
    }

    // Rebuilds a model from raw state (snapshot load, hand-built test fixtures).
    // Weights are taken verbatim; count statistics are recomputed.
    ClusterModel(const Hyperparams& hp, const Matrix& centroids,
                 std::vector<std::int64_t> counts, std::vector<double> weights)
        : hp_(hp), dim_(centroids.cols()), centroids_(centroids.data()),
          counts_(std::move(counts)), weights_(std::move(weights)) {
        hp_.validate();
        if (centroids.rows() != hp_.k || counts_.size() != hp_.k || weights_.size() != hp_.k)
            throw std::invalid_argument("ClusterModel: state arrays must all have length k");
        if (dim_ < 2)
            throw std::invalid_argument("ClusterModel: dimension must be >= 2");
        recompute_count_stats();
    }

    std::size_t dim() const { return dim_; }
    std::size_t k() const { return hp_.k; }
    const Hyperparams& params() const { return hp_; }

    std::span<const double> centroid(std::size_t i) const {
        return {centroids_.data() + i * dim_, dim_};
    }
    const std::vector<double>& centroids_flat() const { return centroids_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    const std::vector<double>& balance_weights() const { return weights_; }
    double mean_count() const { return mean_count_; }
    double var_count() const { return var_count_; }

    // Unpenalized distance from x to centroid i, per the configured mode.
    double raw_distance(std::span<const double> x, std::size_t i) const {
        check_point(x);
        double sq = 0.0;
        const double* c = centroids_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double diff = x[j] - c[j];
            sq += diff * diff;
        }
        return hp_.distance == DistanceMode::euclidean ? std::sqrt(sq) : sq;
    }

    // Index minimizing d(x, mu_j) + w_j; ties go to the lowest index.
    AssignmentResult assign(std::span<const double> x) const {
        check_point(x);
        AssignmentResult best;
        best.penalized_distance = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < hp_.k; ++i) {
            const double raw = raw_distance(x, i);
            const double penalized = raw + weights_[i];
            if (penalized < best.penalized_distance) {
                best.cluster = i;
                best.penalized_distance = penalized;
                best.raw_distance = raw;
            }
        }
        return best;
    }

    // mu_i <- alpha*x + (1-alpha)*mu_i, n_i <- n_i + 1. Other clusters untouched.
    void update_centroid(std::size_t i, std::span<const double> x, double alpha) {
        check_point(x);
        if (i >= hp_.k) throw std::out_of_range("update_centroid: cluster index out of range");
        double* c = centroids_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j)
            c[j] = alpha * x[j] + (1.0 - alpha) * c[j];
        ++counts_[i];
    }

    // Recomputes E[n], V[n] (population variance) and all k balance weights.
    void update_balance_weights(double beta) {
        recompute_count_stats();
        if (var_count_ < kVarianceEpsilon) {
            weights_.assign(hp_.k, 0.0);
            return;
        }
        const double sd = std::sqrt(var_count_);
        for (std::size_t i = 0; i < hp_.k; ++i)
            weights_[i] = beta * (static_cast<double>(counts_[i]) - mean_count_) / sd;
    }

    // One full online step: assign, pull centroid, reweight.
    AssignmentResult step(std::span<const double> x) {
        const AssignmentResult res = assign(x);
        update_centroid(res.cluster, x, hp_.alpha);
        update_balance_weights(hp_.beta);
        return res;
    }

    // Per-point loss term: min_i d(x, mu_i), unpenalized.
    double point_loss(std::span<const double> x) const {
        check_point(x);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < hp_.k; ++i)
            best = std::min(best, raw_distance(x, i));
        return best;
    }

private:
    void check_point(std::span<const double> x) const {
        if (x.size() != dim_)
            throw std::invalid_argument("ClusterModel: point has dimension " +
                                        std::to_string(x.size()) + ", model expects " +
                                        std::to_string(dim_));
    }

    void recompute_count_stats() {
        const double k = static_cast<double>(hp_.k);
        double sum = 0.0;
        for (const auto n : counts_) sum += static_cast<double>(n);
        mean_count_ = sum / k;
        double ss = 0.0;
        for (const auto n : counts_) {
            const double dev = static_cast<double>(n) - mean_count_;
            ss += dev * dev;
        }
        var_count_ = ss / k;
    }

    Hyperparams hp_;
    std::size_t dim_ = 0;
    std::vector<double> centroids_; // k x dim, row-major
    std::vector<std::int64_t> counts_;
    std::vector<double> weights_;
    double mean_count_ = 0.0;
    double var_count_ = 0.0;
};

} // namespace obkm
