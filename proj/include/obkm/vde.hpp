#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "obkm/matrix.hpp"
#include "obkm/rng.hpp"

namespace obkm {

// Axis-aligned box restricting the volume measure (unbounded Voronoi cells
// have infinite Lebesgue volume).
struct BoundingBox {
    std::vector<double> lo;
    std::vector<double> hi;

    void validate() const {
        if (lo.empty() || lo.size() != hi.size())
            throw std::invalid_argument("BoundingBox: lo/hi must be nonempty and equal length");
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (!(lo[a] < hi[a]))
                throw std::invalid_argument("BoundingBox: degenerate axis (lo >= hi)");
    }

    std::size_t dim() const { return lo.size(); }

    double volume() const {
        double v = 1.0;
        for (std::size_t a = 0; a < lo.size(); ++a) v *= hi[a] - lo[a];
        return v;
    }

    bool contains(std::span<const double> x) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (x[a] < lo[a] || x[a] > hi[a]) return false;
        return true;
    }
};

// Per-axis min/max of the points with the width grown by 10% (5% margin each
// side); a flat axis gets a fixed +-0.5 margin so the box stays proper.
inline BoundingBox default_box(const Matrix& points) {
    if (points.rows() == 0) throw std::invalid_argument("default_box: no points");
    BoundingBox box;
    box.lo.assign(points.cols(), std::numeric_limits<double>::infinity());
    box.hi.assign(points.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < points.rows(); ++i)
        for (std::size_t a = 0; a < points.cols(); ++a) {
            box.lo[a] = std::min(box.lo[a], points(i, a));
            box.hi[a] = std::max(box.hi[a], points(i, a));
        }
    for (std::size_t a = 0; a < points.cols(); ++a) {
        const double range = box.hi[a] - box.lo[a];
        const double pad = range > 0.0 ? 0.05 * range : 0.5;
        box.lo[a] -= pad;
        box.hi[a] += pad;
    }
    return box;
}

// Monte Carlo estimate of the Voronoi cell volumes of a site set inside a box.
struct VoronoiEstimate {
    Matrix sites;
    std::vector<double> cell_volumes;
    std::vector<std::int64_t> hits;
    BoundingBox box;
    std::int64_t mc_samples = 0;
    bool all_cells_hit = true; // false flags cells whose volume estimate is 0
};

// Nearest site by squared Euclidean distance (same ordering), lowest index on ties.
inline std::size_t nearest_site(const Matrix& sites, std::span<const double> x) {
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sites.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t a = 0; a < sites.cols(); ++a) {
            const double diff = x[a] - sites(i, a);
            sq += diff * diff;
        }
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return best;
}

// Draws mc_samples uniform points in the box and counts hits per nearest
// site: Vol(c_i) ~= Vol(box) * hits_i / mc_samples.
inline VoronoiEstimate estimate_volumes(const Matrix& sites, const BoundingBox& box,
                                        std::int64_t mc_samples, std::uint64_t seed) {
    box.validate();
    if (sites.rows() == 0) throw std::invalid_argument("estimate_volumes: no sites");
    if (sites.cols() != box.dim())
        throw std::invalid_argument("estimate_volumes: site/box dimension mismatch");
    if (mc_samples < 1) throw std::invalid_argument("estimate_volumes: mc_samples must be >= 1");
    for (std::size_t i = 0; i < sites.rows(); ++i)
        for (std::size_t j = i + 1; j < sites.rows(); ++j) {
            bool same = true;
            for (std::size_t a = 0; a < sites.cols(); ++a)
                if (sites(i, a) != sites(j, a)) { same = false; break; }
            if (same) throw std::invalid_argument("estimate_volumes: duplicate sites");
        }

    VoronoiEstimate est;
    est.sites = sites;
    est.box = box;
    est.mc_samples = mc_samples;
    est.hits.assign(sites.rows(), 0);

    Rng rng(seed);
    std::vector<double> x(box.dim());
    for (std::int64_t s = 0; s < mc_samples; ++s) {
        for (std::size_t a = 0; a < box.dim(); ++a) x[a] = rng.uniform(box.lo[a], box.hi[a]);
        ++est.hits[nearest_site(sites, x)];
    }

    const double box_vol = box.volume();
    est.cell_volumes.resize(sites.rows());
    for (std::size_t i = 0; i < sites.rows(); ++i) {
        est.cell_volumes[i] = box_vol * static_cast<double>(est.hits[i]) /
                              static_cast<double>(mc_samples);
        if (est.hits[i] == 0) est.all_cells_hit = false;
    }
    return est;
}

// Voronoi density at x: 1 / (|P| * Vol(c(x))), locally constant per cell.
inline double density_at(const VoronoiEstimate& est, std::span<const double> x) {
    if (!est.box.contains(x))
        throw std::invalid_argument("density_at: point outside the bounding box");
    const std::size_t i = nearest_site(est.sites, x);
    const double vol = est.cell_volumes[i];
    if (!(vol > 0.0))
        throw std::domain_error("density_at: cell has zero estimated volume (too few samples)");
    return 1.0 / (static_cast<double>(est.sites.rows()) * vol);
}

} // namespace obkm
