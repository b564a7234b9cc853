#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "obkm/csv.hpp"
#include "obkm/matrix.hpp"
#include "obkm/model.hpp"

namespace obkm {

// Model snapshot, JSON:
//   { "format": "obkm-model-v1", "dim", "k", "alpha", "beta", "distance",
//     "centroids" (row-major, k*dim), "counts" (k), "weights" (k),
//     "overall_mean" (optional, written by train for later inference) }
// Doubles are emitted in shortest round-trip form, so reload is bit-exact;
// counts are exact integers. Count statistics are recomputed on load.
inline constexpr const char* kSnapshotFormat = "obkm-model-v1";

struct LoadedModel {
    ClusterModel model;
    std::optional<double> overall_mean;
};

inline nlohmann::json snapshot_json(const ClusterModel& model,
                                    std::optional<double> overall_mean = std::nullopt) {
    nlohmann::json j;
    j["format"] = kSnapshotFormat;
    j["dim"] = model.dim();
    j["k"] = model.k();
    j["alpha"] = model.params().alpha;
    j["beta"] = model.params().beta;
    j["distance"] = distance_mode_name(model.params().distance);
    j["centroids"] = model.centroids_flat();
    j["counts"] = model.counts();
    j["weights"] = model.balance_weights();
    if (overall_mean) j["overall_mean"] = *overall_mean;
    return j;
}

inline void save_model(const std::filesystem::path& path, const ClusterModel& model,
                       std::optional<double> overall_mean = std::nullopt) {
    atomic_write_text(path, snapshot_json(model, overall_mean).dump(2) + "\n");
}

inline LoadedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", std::string{}) != kSnapshotFormat)
        throw std::runtime_error("snapshot: unrecognized format");
    Hyperparams hp;
    hp.k = j.at("k").get<std::size_t>();
    hp.alpha = j.at("alpha").get<double>();
    hp.beta = j.at("beta").get<double>();
    const auto mode = distance_mode_from_name(j.at("distance").get<std::string>());
    if (!mode) throw std::runtime_error("snapshot: unknown distance mode");
    hp.distance = *mode;

    const auto dim = j.at("dim").get<std::size_t>();
    const auto flat = j.at("centroids").get<std::vector<double>>();
    if (flat.size() != hp.k * dim)
        throw std::runtime_error("snapshot: centroid array has wrong length");
    Matrix centroids(hp.k, dim);
    for (std::size_t i = 0; i < hp.k; ++i)
        for (std::size_t a = 0; a < dim; ++a) centroids(i, a) = flat[i * dim + a];

    ClusterModel model(hp, centroids, j.at("counts").get<std::vector<std::int64_t>>(),
                       j.at("weights").get<std::vector<double>>());
    std::optional<double> overall_mean;
    if (j.contains("overall_mean")) overall_mean = j.at("overall_mean").get<double>();
    return {std::move(model), overall_mean};
}

inline LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("snapshot parse error in '" + path.string() + "': " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("snapshot schema error in '" + path.string() + "': " + e.what());
    }
}

} // namespace obkm
