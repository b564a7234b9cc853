#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obkm/matrix.hpp"
#include "obkm/rng.hpp"

namespace obkm {

struct DistributionSpec {
    enum class Family { uniform, normal, gamma };

    Family family = Family::uniform;
    double a = -1.0; // uniform: lo,  normal: mean, gamma: shape
    double b = 1.0;  // uniform: hi,  normal: std,  gamma: scale

    void validate() const {
        switch (family) {
        case Family::uniform:
            if (!(a < b)) throw std::invalid_argument("uniform: requires lo < hi");
            break;
        case Family::normal:
            if (!(b > 0.0)) throw std::invalid_argument("normal: requires std > 0");
            break;
        case Family::gamma:
            if (!(a > 0.0) || !(b > 0.0))
                throw std::invalid_argument("gamma: requires shape > 0 and scale > 0");
            break;
        }
    }

    double sample(Rng& rng) const {
        switch (family) {
        case Family::uniform: return rng.uniform(a, b);
        case Family::normal: return rng.normal(a, b);
        case Family::gamma: return rng.gamma(a, b);
        }
        throw std::logic_error("DistributionSpec: bad family");
    }

    double mean() const {
        switch (family) {
        case Family::uniform: return 0.5 * (a + b);
        case Family::normal: return a;
        case Family::gamma: return a * b;
        }
        throw std::logic_error("DistributionSpec: bad family");
    }

    double variance() const {
        switch (family) {
        case Family::uniform: return (b - a) * (b - a) / 12.0;
        case Family::normal: return b * b;
        case Family::gamma: return a * b * b;
        }
        throw std::logic_error("DistributionSpec: bad family");
    }
};

// How the last column relates to the first d-1 columns of a row.
enum class RelationTransform { independent, sum_of_squares, sum_of_cubes };

inline std::string_view relation_name(RelationTransform r) {
    switch (r) {
    case RelationTransform::independent: return "independent";
    case RelationTransform::sum_of_squares: return "sum_of_squares";
    case RelationTransform::sum_of_cubes: return "sum_of_cubes";
    }
    return "?";
}

struct Component {
    DistributionSpec dist;
    RelationTransform relation = RelationTransform::independent;
    double fraction = 1.0;
};

// Declarative description of a synthetic dataset.
struct DataSpec {
    std::size_t dim = 2;
    std::vector<Component> components;
    std::size_t n_points = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 2) throw std::invalid_argument("DataSpec: dim must be >= 2");
        if (components.empty() || components.size() > 3)
            throw std::invalid_argument("DataSpec: need 1 to 3 components");
        if (n_points < components.size())
            throw std::invalid_argument("DataSpec: n_points smaller than component count");
        double total = 0.0;
        for (const auto& c : components) {
            c.dist.validate();
            if (!(c.fraction > 0.0))
                throw std::invalid_argument("DataSpec: fractions must be positive");
            total += c.fraction;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("DataSpec: fractions must sum to 1");
    }
};

// Deterministic largest-remainder allocation: every count is within 1 of
// fraction * n and the counts sum to n exactly.
inline std::vector<std::size_t> component_row_counts(const DataSpec& spec) {
    const std::size_t m = spec.components.size();
    std::vector<std::size_t> counts(m);
    std::vector<std::pair<double, std::size_t>> remainders(m);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = spec.components[i].fraction * static_cast<double>(spec.n_points);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = {exact - std::floor(exact), i};
        assigned += counts[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first; // largest remainder first
        return x.second < y.second;                       // ties to the lowest index
    });
    for (std::size_t r = 0; assigned < spec.n_points; ++r, ++assigned)
        ++counts[remainders[r % m].second];
    return counts;
}

// Draws the dataset: per component, each row gets d-1 feature draws and a last
// column that is either one more draw (independent) or the row's sum of
// squares / cubes. Component blocks are then shuffled together (Fisher-Yates
// on the same stream). Bit-identical for equal specs.
inline Matrix generate(const DataSpec& spec) {
    spec.validate();
    const auto counts = component_row_counts(spec);
    Rng rng(spec.seed);
    Matrix out(spec.n_points, spec.dim);
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
        const auto& comp = spec.components[c];
        for (std::size_t r = 0; r < counts[c]; ++r, ++row) {
            auto dst = out.row(row);
            double sq = 0.0, cu = 0.0;
            for (std::size_t j = 0; j + 1 < spec.dim; ++j) {
                const double v = comp.dist.sample(rng);
                dst[j] = v;
                sq += v * v;
                cu += v * v * v;
            }
            switch (comp.relation) {
            case RelationTransform::independent: dst[spec.dim - 1] = comp.dist.sample(rng); break;
            case RelationTransform::sum_of_squares: dst[spec.dim - 1] = sq; break;
            case RelationTransform::sum_of_cubes: dst[spec.dim - 1] = cu; break;
            }
        }
    }
    for (std::size_t i = spec.n_points - 1; i > 0; --i)
        out.swap_rows(i, rng.next_below(i + 1));
    return out;
}

// Seeded disjoint row partition: floor(n * train_fraction) rows train, rest test.
inline std::pair<Matrix, Matrix> split(const Matrix& data, double train_fraction,
                                       std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    const std::size_t n = data.rows();
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("split: a side would be empty");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.next_below(i + 1)]);
    Matrix train(n_train, data.cols());
    Matrix test(n - n_train, data.cols());
    for (std::size_t i = 0; i < n; ++i) {
        auto src = data.row(idx[i]);
        auto dst = i < n_train ? train.row(i) : test.row(i - n_train);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return {std::move(train), std::move(test)};
}

// The fifteen dataset recipes used throughout the experiments: one true
// cluster per base distribution (plain / squared / cubed last column), plus
// the two- and three-cluster mixtures. Parameters the source experiments left
// open use a separation of ~6 between components. Callers override
// dim/n_points/seed as needed (defaults: d=2, n=11000, seed=42).
inline const std::vector<std::pair<std::string, DataSpec>>& dataset_presets() {
    auto uni = [](double lo, double hi) {
        return DistributionSpec{DistributionSpec::Family::uniform, lo, hi};
    };
    auto nor = [](double mean, double sd) {
        return DistributionSpec{DistributionSpec::Family::normal, mean, sd};
    };
    auto gam = [](double shape, double scale) {
        return DistributionSpec{DistributionSpec::Family::gamma, shape, scale};
    };
    auto one = [](DistributionSpec d, RelationTransform r) {
        return DataSpec{2, {{d, r, 1.0}}, 11000, 42};
    };
    auto mix = [](std::vector<DistributionSpec> ds) {
        DataSpec spec{2, {}, 11000, 42};
        const double f = 1.0 / static_cast<double>(ds.size());
        for (const auto& d : ds)
            spec.components.push_back({d, RelationTransform::independent, f});
        return spec;
    };
    static const std::vector<std::pair<std::string, DataSpec>> catalog = {
        {"uniform", one(uni(-1, 1), RelationTransform::independent)},
        {"uniform_squared", one(uni(-1, 1), RelationTransform::sum_of_squares)},
        {"uniform_cube", one(uni(-1, 1), RelationTransform::sum_of_cubes)},
        {"normal", one(nor(0, 1), RelationTransform::independent)},
        {"normal_squared", one(nor(0, 1), RelationTransform::sum_of_squares)},
        {"normal_cube", one(nor(0, 1), RelationTransform::sum_of_cubes)},
        {"gamma", one(gam(1, 1), RelationTransform::independent)},
        {"gamma_squared", one(gam(1, 1), RelationTransform::sum_of_squares)},
        {"gamma_cube", one(gam(1, 1), RelationTransform::sum_of_cubes)},
        {"uniform_2clust", mix({uni(-1, 1), uni(5, 7)})},
        {"normal_2clust", mix({nor(0, 1), nor(6, 1)})},
        {"gamma_2clust", mix({gam(1, 1), gam(9, 1)})},
        {"uniform_3clust", mix({uni(-1, 1), uni(5, 7), uni(11, 13)})},
        {"normal_3clust", mix({nor(0, 1), nor(6, 1), nor(12, 1)})},
        {"gamma_normal_3clust", mix({gam(1, 1), gam(9, 1), nor(20, 1)})},
    };
    return catalog;
}

inline const DataSpec* find_preset(std::string_view name) {
    for (const auto& [n, spec] : dataset_presets())
        if (n == name) return &spec;
    return nullptr;
}

inline DataSpec preset_spec(std::string_view name, std::size_t dim, std::size_t n_points,
                            std::uint64_t seed) {
    const DataSpec* base = find_preset(name);
    if (base == nullptr)
        throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
    DataSpec spec = *base;
    spec.dim = dim;
    spec.n_points = n_points;
    spec.seed = seed;
    spec.validate();
    return spec;
}

} // namespace obkm
