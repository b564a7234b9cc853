#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "obkm/datagen.hpp"
#include "obkm/model.hpp"
#include "obkm/rng.hpp"

using namespace obkm;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> rs) {
    Matrix m;
    for (const auto& r : rs) m.append_row(std::vector<double>(r));
    return m;
}

ClusterModel make_model(std::size_t k, const Matrix& centroids, std::vector<double> weights,
                        std::vector<std::int64_t> counts = {},
                        DistanceMode mode = DistanceMode::euclidean) {
    if (counts.empty()) counts.assign(k, 1);
    Hyperparams hp;
    hp.k = k;
    hp.distance = mode;
    return {hp, centroids, std::move(counts), std::move(weights)};
}

// Independent oracle: scan all clusters for the smallest raw distance.
std::size_t brute_force_nearest(const ClusterModel& m, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.k(); ++i) {
        const double d = m.raw_distance(x, i);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// Streams a full dataset through a fresh model seeded from its first k rows.
ClusterModel stream_all(const Matrix& data, Hyperparams hp) {
    Matrix seeds(hp.k, data.cols());
    for (std::size_t i = 0; i < hp.k; ++i) {
        const auto src = data.row(i);
        std::copy(src.begin(), src.end(), seeds.row(i).begin());
    }
    ClusterModel model(hp, seeds);
    for (std::size_t i = hp.k; i < data.rows(); ++i) model.step(data.row(i));
    return model;
}

double count_variance(const std::vector<std::int64_t>& counts) {
    double mean = 0.0;
    for (const auto n : counts) mean += static_cast<double>(n);
    mean /= static_cast<double>(counts.size());
    double ss = 0.0;
    for (const auto n : counts) ss += (static_cast<double>(n) - mean) * (static_cast<double>(n) - mean);
    return ss / static_cast<double>(counts.size());
}

} // namespace

TEST_CASE("init seeds centroids with unit counts and zero weights") {
    Hyperparams hp;
    hp.k = 1;
    ClusterModel m1(hp, rows({{0, 0}}));
    CHECK(m1.centroid(0)[0] == 0.0);
    CHECK(m1.counts() == std::vector<std::int64_t>{1});
    CHECK(m1.balance_weights() == std::vector<double>{0.0});

    hp.k = 2;
    ClusterModel m2(hp, rows({{0, 0}, {1, 1}}));
    CHECK(m2.counts() == std::vector<std::int64_t>{1, 1});
    CHECK(m2.mean_count() == 1.0);
    CHECK(m2.var_count() == 0.0);
    CHECK(m2.balance_weights() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("init from the first points of a seeded stream is bit-exact") {
    DataSpec spec{2, {{{DistributionSpec::Family::uniform, -1.0, 1.0},
                       RelationTransform::independent, 1.0}}, 10, 99};
    const Matrix data = generate(spec);
    Hyperparams hp;
    hp.k = 3;
    Matrix seeds(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        std::copy(data.row(i).begin(), data.row(i).end(), seeds.row(i).begin());
    ClusterModel m(hp, seeds);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(m.centroid(i)[j] == data(i, j));
}

TEST_CASE("init validates seed count and dimension") {
    Hyperparams hp;
    hp.k = 3;
    CHECK_THROWS_AS(ClusterModel(hp, rows({{0, 0}, {1, 1}})), std::invalid_argument);
    hp.k = 1;
    CHECK_THROWS_AS(ClusterModel(hp, rows({{0}})), std::invalid_argument);
    hp.alpha = 1.5;
    CHECK_THROWS_AS(ClusterModel(hp, rows({{0, 0}})), std::invalid_argument);
}

TEST_CASE("assign picks the single cluster when k=1") {
    Hyperparams hp;
    hp.k = 1;
    ClusterModel m(hp, rows({{3, 4}}));
    const auto res = m.assign(std::vector<double>{100.0, -7.0});
    CHECK(res.cluster == 0);
}

TEST_CASE("assign matches hand-computed distances") {
    auto m = make_model(2, rows({{0, 0}, {10, 10}}), {0.0, 0.0});
    const auto res = m.assign(std::vector<double>{1.0, 1.0});
    CHECK(res.cluster == 0);
    CHECK(res.raw_distance == Catch::Approx(std::sqrt(2.0)));
    CHECK(res.penalized_distance == res.raw_distance + m.balance_weights()[0]);
}

TEST_CASE("a balance penalty flips the nearest choice") {
    // cluster 0 is nearer (0.5 vs 1.5) but carries weight +5: 5.5 vs 1.5.
    auto m = make_model(2, rows({{0, 0}, {2, 0}}), {5.0, 0.0});
    const auto res = m.assign(std::vector<double>{0.5, 0.0});
    CHECK(res.cluster == 1);
    CHECK(res.penalized_distance == Catch::Approx(1.5));
    CHECK(res.raw_distance == Catch::Approx(1.5));
}

TEST_CASE("assign tie breaks to the lowest index") {
    auto m = make_model(3, rows({{1, 0}, {-1, 0}, {0, 5}}), {0.0, 0.0, 0.0});
    CHECK(m.assign(std::vector<double>{0.0, 0.0}).cluster == 0);
}

TEST_CASE("assign rejects dimension mismatches") {
    auto m = make_model(1, rows({{0, 0}}), {0.0});
    CHECK_THROWS_AS(m.assign(std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("assign with zero weights equals the brute-force nearest scan") {
    Rng rng(321);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t k = 1 + rng.next_below(10);
        const std::size_t d = 2 + rng.next_below(3);
        const auto mode = rep % 2 == 0 ? DistanceMode::euclidean : DistanceMode::squared_euclidean;
        Matrix centroids(k, d);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < d; ++j) centroids(i, j) = rng.uniform(-5.0, 5.0);
        auto m = make_model(k, centroids, std::vector<double>(k, 0.0), {}, mode);
        std::vector<double> x(d);
        for (int q = 0; q < 200; ++q) {
            for (auto& v : x) v = rng.uniform(-6.0, 6.0);
            CHECK(m.assign(x).cluster == brute_force_nearest(m, x));
        }
    }
}

TEST_CASE("update_centroid follows the convex pull") {
    SECTION("alpha = 1 replaces the centroid") {
        auto m = make_model(1, rows({{5, 5}}), {0.0});
        m.update_centroid(0, std::vector<double>{2.0, 2.0}, 1.0);
        CHECK(m.centroid(0)[0] == 2.0);
        CHECK(m.centroid(0)[1] == 2.0);
        CHECK(m.counts()[0] == 2);
    }
    SECTION("alpha = 0.5 lands at the midpoint") {
        auto m = make_model(1, rows({{0, 0}}), {0.0});
        m.update_centroid(0, std::vector<double>{2.0, 4.0}, 0.5);
        CHECK(m.centroid(0)[0] == 1.0);
        CHECK(m.centroid(0)[1] == 2.0);
    }
    SECTION("alpha = 0.6") {
        auto m = make_model(1, rows({{1, 0}}), {0.0});
        m.update_centroid(0, std::vector<double>{0.0, 1.0}, 0.6);
        CHECK(m.centroid(0)[0] == Catch::Approx(0.4));
        CHECK(m.centroid(0)[1] == Catch::Approx(0.6));
    }
}

TEST_CASE("update_centroid leaves the other clusters bit-identical") {
    auto m = make_model(3, rows({{1, 2}, {3, 4}, {5, 6}}), {0.0, 0.0, 0.0});
    const auto before = m.centroids_flat();
    m.update_centroid(1, std::vector<double>{-1.0, -1.0}, 0.3);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(m.centroid(0)[j] == before[j]);
        CHECK(m.centroid(2)[j] == before[4 + j]);
    }
    CHECK(m.counts() == std::vector<std::int64_t>{1, 2, 1});
    CHECK_THROWS_AS(m.update_centroid(3, std::vector<double>{0.0, 0.0}, 0.5), std::out_of_range);
}

TEST_CASE("update_balance_weights matches hand-computed values") {
    SECTION("equal counts force zero weights") {
        auto m = make_model(3, rows({{0, 0}, {1, 0}, {2, 0}}), {1.0, 2.0, 3.0}, {5, 5, 5});
        m.update_balance_weights(0.9);
        CHECK(m.balance_weights() == std::vector<double>{0.0, 0.0, 0.0});
        CHECK(m.var_count() == 0.0);
    }
    SECTION("counts [1,3], beta = 1") {
        auto m = make_model(2, rows({{0, 0}, {1, 0}}), {0.0, 0.0}, {1, 3});
        m.update_balance_weights(1.0);
        CHECK(m.mean_count() == 2.0);
        CHECK(m.var_count() == 1.0);
        CHECK(m.balance_weights()[0] == -1.0);
        CHECK(m.balance_weights()[1] == 1.0);
    }
    SECTION("counts [1,3], beta = 0.07") {
        auto m = make_model(2, rows({{0, 0}, {1, 0}}), {0.0, 0.0}, {1, 3});
        m.update_balance_weights(0.07);
        CHECK(m.balance_weights()[0] == -0.07);
        CHECK(m.balance_weights()[1] == 0.07);
    }
}

TEST_CASE("balance weights are a zero-sum z-score, linear in beta") {
    Rng rng(77);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t k = 2 + rng.next_below(12);
        Matrix centroids(k, 2);
        std::vector<std::int64_t> counts(k);
        for (std::size_t i = 0; i < k; ++i) {
            centroids(i, 0) = rng.uniform(-1.0, 1.0);
            centroids(i, 1) = rng.uniform(-1.0, 1.0);
            counts[i] = 1 + static_cast<std::int64_t>(rng.next_below(1000));
        }
        auto m = make_model(k, centroids, std::vector<double>(k, 0.0), counts);
        m.update_balance_weights(0.07);
        if (m.var_count() > ClusterModel::kVarianceEpsilon) {
            double sum = 0.0;
            for (const double w : m.balance_weights()) sum += w;
            CHECK(std::abs(sum) < 1e-9);
        }
        const auto w1 = m.balance_weights();
        m.update_balance_weights(0.21);
        const auto w3 = m.balance_weights();
        for (std::size_t i = 0; i < k; ++i)
            CHECK(w3[i] == Catch::Approx(3.0 * w1[i]).margin(1e-14));
    }
}

TEST_CASE("step composes assign, pull and reweight") {
    Hyperparams hp;
    hp.k = 1;
    hp.alpha = 0.5;
    ClusterModel m(hp, rows({{0, 0}}));
    const auto res = m.step(std::vector<double>{2.0, 2.0});
    CHECK(res.cluster == 0);
    CHECK(m.centroid(0)[0] == 1.0);
    CHECK(m.counts()[0] == 2);
    // single cluster: V[n] = 0, weight stays zero
    CHECK(m.balance_weights()[0] == 0.0);
}

TEST_CASE("identical seeded streams give bit-identical models") {
    const DataSpec spec = preset_spec("uniform_2clust", 2, 500, 7);
    const Matrix data = generate(spec);
    Hyperparams hp;
    hp.k = 8;
    const auto a = stream_all(data, hp);
    const auto b = stream_all(data, hp);
    CHECK(a.centroids_flat() == b.centroids_flat());
    CHECK(a.counts() == b.counts());
    CHECK(a.balance_weights() == b.balance_weights());
}

TEST_CASE("ten thousand uniform points at the reference settings keep all clusters alive") {
    const DataSpec spec = preset_spec("uniform", 2, 10000, 4242);
    const Matrix data = generate(spec);
    Hyperparams hp; // defaults: k=300, alpha=0.6, beta=0.07
    const auto m = stream_all(data, hp);
    for (const auto n : m.counts()) CHECK(n >= 1);
    std::int64_t total = 0;
    for (const auto n : m.counts()) total += n;
    CHECK(total == 10000);
}

TEST_CASE("balancing at beta=0.07 lowers the final count variance") {
    const DataSpec spec = preset_spec("normal_2clust", 2, 10000, 6);
    const Matrix data = generate(spec);
    Hyperparams hp;
    hp.k = 10;
    hp.alpha = 0.6;
    hp.beta = 0.0;
    const double var0 = count_variance(stream_all(data, hp).counts());
    hp.beta = 0.07;
    const double var7 = count_variance(stream_all(data, hp).counts());
    CHECK(var7 < var0);
}

TEST_CASE("point_loss is the unpenalized minimum distance") {
    SECTION("zero at a centroid") {
        auto m = make_model(2, rows({{1, 2}, {5, 5}}), {3.0, -4.0});
        CHECK(m.point_loss(std::vector<double>{1.0, 2.0}) == 0.0);
    }
    SECTION("euclidean hand value") {
        auto m = make_model(2, rows({{0, 0}, {3, 4}}), {0.0, 0.0});
        CHECK(m.point_loss(std::vector<double>{3.0, 0.0}) == Catch::Approx(3.0));
    }
    SECTION("squared euclidean hand value") {
        auto m = make_model(1, rows({{0, 0}}), {0.0}, {}, DistanceMode::squared_euclidean);
        CHECK(m.point_loss(std::vector<double>{3.0, 4.0}) == 25.0);
    }
}
