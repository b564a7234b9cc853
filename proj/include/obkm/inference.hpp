#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "obkm/model.hpp"

namespace obkm {

// The seven centroid-based estimators of a query's unknown last coordinate.
enum class Method {
    euclid,
    norm_weights,
    cluster_size,
    mean_merge,
    nwcs_merge,
    nwed_merge,
    cs_exp,
};

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::euclid,      Method::norm_weights, Method::cluster_size, Method::mean_merge,
    Method::nwcs_merge,  Method::nwed_merge,   Method::cs_exp,
};

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::euclid: return "euclid";
    case Method::norm_weights: return "norm_weights";
    case Method::cluster_size: return "cluster_size";
    case Method::mean_merge: return "mean_merge";
    case Method::nwcs_merge: return "nwcs_merge";
    case Method::nwed_merge: return "nwed_merge";
    case Method::cs_exp: return "cs_exp";
    }
    return "?";
}

inline std::optional<Method> method_from_name(std::string_view s) {
    for (const Method m : kAllMethods)
        if (method_name(m) == s) return m;
    return std::nullopt;
}

struct InferenceEstimate {
    Method method = Method::euclid;
    double value = 0.0;
};

struct InferenceParams {
    double temperature = 1.0;   // softmax sharpness in norm_weights
    std::size_t neighbor_count = 5;
    double merge_alpha = 0.5;   // mixing coefficient in the merged methods
    double cs_beta = 1.0;       // exponent scale in cs_exp
    bool normalize_cs_exp = true;

    // Each operation checks only the fields it uses; validate(k) checks them all.
    void validate_softmax() const {
        if (!(temperature > 0.0))
            throw std::invalid_argument("InferenceParams: temperature must be > 0");
    }
    void validate_neighbors(std::size_t k) const {
        if (neighbor_count < 1)
            throw std::invalid_argument("InferenceParams: neighbor_count must be >= 1");
        if (neighbor_count > k)
            throw std::invalid_argument("InferenceParams: neighbor_count exceeds cluster count");
    }
    void validate_merge() const {
        if (!(merge_alpha >= 0.0) || !(merge_alpha <= 1.0))
            throw std::invalid_argument("InferenceParams: merge_alpha must be in [0, 1]");
    }
    void validate(std::size_t k) const {
        validate_softmax();
        validate_neighbors(k);
        validate_merge();
        if (!std::isfinite(cs_beta))
            throw std::invalid_argument("InferenceParams: cs_beta must be finite");
    }
};

// The neighbor_count clusters nearest to a query in projection, distances
// nondecreasing, ties resolved toward the lower index.
struct NeighborSet {
    std::vector<std::size_t> indices;
    std::vector<std::int64_t> sizes;
    std::vector<double> distances;
};

namespace detail {

inline void check_query(const ClusterModel& model, std::span<const double> known) {
    if (known.size() + 1 != model.dim())
        throw std::invalid_argument("query must have model dimension minus one coordinates");
}

inline double projected_last(const ClusterModel& model, std::size_t i) {
    return model.centroid(i)[model.dim() - 1];
}

} // namespace detail

// Euclidean distance between the query and the first d-1 coordinates of each
// centroid. Inference always measures plain Euclidean distance; the model's
// training distance_mode only affects assignment and loss.
inline std::vector<double> projected_distances(const ClusterModel& model,
                                               std::span<const double> known) {
    detail::check_query(model, known);
    std::vector<double> out(model.k());
    for (std::size_t i = 0; i < model.k(); ++i) {
        const auto c = model.centroid(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < known.size(); ++j) {
            const double diff = known[j] - c[j];
            sq += diff * diff;
        }
        out[i] = std::sqrt(sq);
    }
    return out;
}

// softmax(-temperature * d) with the max-shift identity, so huge distances
// cannot overflow the exponentials.
inline std::vector<double> softmax_from_distances(std::span<const double> distances,
                                                  double temperature) {
    std::vector<double> w(distances.size());
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < distances.size(); ++i) {
        w[i] = -temperature * distances[i];
        hi = std::max(hi, w[i]);
    }
    double total = 0.0;
    for (auto& v : w) {
        v = std::exp(v - hi);
        total += v;
    }
    for (auto& v : w) v /= total;
    return w;
}

inline std::vector<double> softmax_weights(const ClusterModel& model,
                                           std::span<const double> known, double temperature) {
    return softmax_from_distances(projected_distances(model, known), temperature);
}

inline NeighborSet nearest_neighbors(const ClusterModel& model, std::span<const double> known,
                                     std::size_t count) {
    if (count > model.k())
        throw std::invalid_argument("neighbor_count exceeds cluster count");
    const auto dist = projected_distances(model, known);
    std::vector<std::size_t> order(model.k());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    NeighborSet ns;
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = order[r];
        ns.indices.push_back(i);
        ns.sizes.push_back(model.counts()[i]);
        ns.distances.push_back(dist[i]);
    }
    return ns;
}

// Last coordinate of the centroid whose projection is nearest; ties go to the
// lowest index.
inline InferenceEstimate infer_euclid(const ClusterModel& model, std::span<const double> known) {
    const auto dist = projected_distances(model, known);
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] < dist[best]) best = i;
    return {Method::euclid, detail::projected_last(model, best)};
}

// Softmax-weighted mean of all k centroids' last coordinates, the nearest
// weighted highest.
inline InferenceEstimate infer_norm_weights(const ClusterModel& model,
                                            std::span<const double> known,
                                            const InferenceParams& p) {
    p.validate_softmax();
    const auto w = softmax_weights(model, known, p.temperature);
    double value = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        value += w[i] * detail::projected_last(model, i);
    return {Method::norm_weights, value};
}

namespace detail {

inline std::vector<double> cluster_size_weights(const NeighborSet& ns) {
    double total = 0.0;
    for (const auto t : ns.sizes) total += static_cast<double>(t);
    std::vector<double> w(ns.sizes.size());
    if (total > 0.0) {
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] = static_cast<double>(ns.sizes[j]) / total;
    } else {
        // hand-built models may carry all-zero counts; keep a convex combination
        w.assign(ns.sizes.size(), 1.0 / static_cast<double>(ns.sizes.size()));
    }
    return w;
}

inline std::vector<double> cs_exp_weights(const NeighborSet& ns, double cs_beta, bool normalize) {
    double total = 0.0;
    for (const auto t : ns.sizes) total += static_cast<double>(t);
    std::vector<double> w(ns.sizes.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double ratio = total > 0.0 ? static_cast<double>(ns.sizes[j]) / total : 0.0;
        w[j] = std::exp(-cs_beta * ratio);
        sum += w[j];
    }
    if (normalize)
        for (auto& v : w) v /= sum;
    return w;
}

} // namespace detail

// Count-weighted mean over the neighbor_count nearest clusters: bigger
// neighbors pull harder.
inline InferenceEstimate infer_cluster_size(const ClusterModel& model,
                                            std::span<const double> known,
                                            const InferenceParams& p) {
    p.validate_neighbors(model.k());
    const auto ns = nearest_neighbors(model, known, p.neighbor_count);
    const auto w = detail::cluster_size_weights(ns);
    double value = 0.0;
    for (std::size_t j = 0; j < ns.indices.size(); ++j)
        value += w[j] * detail::projected_last(model, ns.indices[j]);
    return {Method::cluster_size, value};
}

// Exponentially damped cluster-size weights over the neighbor set. Normalized
// by default so the estimate stays a convex combination; the literal
// (unnormalized) form is available behind p.normalize_cs_exp = false.
inline InferenceEstimate infer_cs_exp(const ClusterModel& model, std::span<const double> known,
                                      const InferenceParams& p) {
    p.validate_neighbors(model.k());
    const auto ns = nearest_neighbors(model, known, p.neighbor_count);
    const auto w = detail::cs_exp_weights(ns, p.cs_beta, p.normalize_cs_exp);
    double value = 0.0;
    for (std::size_t j = 0; j < ns.indices.size(); ++j)
        value += w[j] * detail::projected_last(model, ns.indices[j]);
    return {Method::cs_exp, value};
}

// merge_alpha * overall_mean + (1 - merge_alpha) * norm_weights.
// overall_mean is the running mean of the training points' last coordinate.
inline InferenceEstimate infer_mean_merge(const ClusterModel& model,
                                          std::span<const double> known,
                                          const InferenceParams& p, double overall_mean) {
    p.validate_merge();
    const double nw = infer_norm_weights(model, known, p).value;
    return {Method::mean_merge, p.merge_alpha * overall_mean + (1.0 - p.merge_alpha) * nw};
}

// merge_alpha * norm_weights + (1 - merge_alpha) * cluster_size.
inline InferenceEstimate infer_nwcs_merge(const ClusterModel& model,
                                          std::span<const double> known,
                                          const InferenceParams& p) {
    p.validate_merge();
    const double nw = infer_norm_weights(model, known, p).value;
    const double cs = infer_cluster_size(model, known, p).value;
    return {Method::nwcs_merge, p.merge_alpha * nw + (1.0 - p.merge_alpha) * cs};
}

// merge_alpha * norm_weights + (1 - merge_alpha) * euclid.
inline InferenceEstimate infer_nwed_merge(const ClusterModel& model,
                                          std::span<const double> known,
                                          const InferenceParams& p) {
    p.validate_merge();
    const double nw = infer_norm_weights(model, known, p).value;
    const double eu = infer_euclid(model, known).value;
    return {Method::nwed_merge, p.merge_alpha * nw + (1.0 - p.merge_alpha) * eu};
}

// All seven estimates, tagged, in kAllMethods order. The shared components
// (euclid, norm_weights, cluster_size) are computed once so the merged values
// are bit-identical to merging the standalone results.
inline std::array<InferenceEstimate, 7> infer_all(const ClusterModel& model,
                                                  std::span<const double> known,
                                                  const InferenceParams& p,
                                                  double overall_mean) {
    p.validate(model.k());
    const double eu = infer_euclid(model, known).value;
    const double nw = infer_norm_weights(model, known, p).value;
    const double cs = infer_cluster_size(model, known, p).value;
    const double ce = infer_cs_exp(model, known, p).value;
    const double a = p.merge_alpha;
    return {{
        {Method::euclid, eu},
        {Method::norm_weights, nw},
        {Method::cluster_size, cs},
        {Method::mean_merge, a * overall_mean + (1.0 - a) * nw},
        {Method::nwcs_merge, a * nw + (1.0 - a) * cs},
        {Method::nwed_merge, a * nw + (1.0 - a) * eu},
        {Method::cs_exp, ce},
    }};
}

} // namespace obkm
