#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "obkm/csv.hpp"
#include "obkm/datagen.hpp"
#include "obkm/inference.hpp"
#include "obkm/matrix.hpp"
#include "obkm/model.hpp"

namespace obkm {

// Loss and per-method inference errors for one block of window_size
// consecutive assignments. window_index is 1-based.
struct WindowStats {
    std::size_t window_index = 0;
    std::size_t window_size = 0;
    double cumulative_loss = 0.0;
    std::array<double, 7> per_method_error{}; // kAllMethods order
};

struct RunRecord {
    Hyperparams hp;
    InferenceParams params;
    std::string preset;
    std::uint64_t seed = 0;
    std::vector<WindowStats> windows;
    std::vector<std::int64_t> final_counts;

    double final_count_variance() const {
        const double k = static_cast<double>(final_counts.size());
        double mean = 0.0;
        for (const auto n : final_counts) mean += static_cast<double>(n);
        mean /= k;
        double ss = 0.0;
        for (const auto n : final_counts) {
            const double dev = static_cast<double>(n) - mean;
            ss += dev * dev;
        }
        return ss / k;
    }
};

// Sum of squared residuals of one method over a test set.
inline double inference_error(const ClusterModel& model, const Matrix& test, Method method,
                              const InferenceParams& p, double overall_mean) {
    if (test.rows() == 0) throw std::invalid_argument("inference_error: empty test set");
    double total = 0.0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const auto row = test.row(i);
        const auto known = row.first(row.size() - 1);
        const double truth = row.back();
        double est = 0.0;
        switch (method) {
        case Method::euclid: est = infer_euclid(model, known).value; break;
        case Method::norm_weights: est = infer_norm_weights(model, known, p).value; break;
        case Method::cluster_size: est = infer_cluster_size(model, known, p).value; break;
        case Method::mean_merge: est = infer_mean_merge(model, known, p, overall_mean).value; break;
        case Method::nwcs_merge: est = infer_nwcs_merge(model, known, p).value; break;
        case Method::nwed_merge: est = infer_nwed_merge(model, known, p).value; break;
        case Method::cs_exp: est = infer_cs_exp(model, known, p).value; break;
        }
        const double r = truth - est;
        total += r * r;
    }
    return total;
}

namespace detail {

// One pass over the test set accumulating all seven methods at once;
// bit-identical to calling inference_error per method.
inline std::array<double, 7> all_method_errors(const ClusterModel& model, const Matrix& test,
                                               const InferenceParams& p, double overall_mean) {
    std::array<double, 7> errors{};
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const auto row = test.row(i);
        const auto known = row.first(row.size() - 1);
        const double truth = row.back();
        const auto estimates = infer_all(model, known, p, overall_mean);
        for (std::size_t m = 0; m < estimates.size(); ++m) {
            const double r = truth - estimates[m].value;
            errors[m] += r * r;
        }
    }
    return errors;
}

} // namespace detail

struct TrainResult {
    RunRecord record;
    ClusterModel model;
    double overall_mean = 0.0; // running mean of the train points' last coordinate
};

// Streams the training set through a fresh model. The first k points seed the
// centroids; each later point is charged its prequential loss (distance under
// the pre-update model) and then stepped in. At every window boundary the
// window's summed loss is recorded together with all seven inference errors
// over the full test set against the frozen current model. Trailing points
// that do not fill a window still train but produce no window record.
inline TrainResult run_training(const Matrix& train, const Matrix& test, const Hyperparams& hp,
                                const InferenceParams& p, std::size_t window_size) {
    hp.validate();
    p.validate(hp.k);
    if (window_size < 1) throw std::invalid_argument("run_training: window_size must be >= 1");
    if (train.rows() < hp.k + window_size)
        throw std::invalid_argument("run_training: need at least k + window_size train points");
    if (test.rows() == 0) throw std::invalid_argument("run_training: empty test set");
    if (test.cols() != train.cols())
        throw std::invalid_argument("run_training: train/test dimension mismatch");

    Matrix seeds(hp.k, train.cols());
    for (std::size_t i = 0; i < hp.k; ++i) {
        const auto src = train.row(i);
        std::copy(src.begin(), src.end(), seeds.row(i).begin());
    }
    ClusterModel model(hp, seeds);

    double last_sum = 0.0;
    for (std::size_t i = 0; i < hp.k; ++i) last_sum += train(i, train.cols() - 1);
    std::size_t seen = hp.k;

    RunRecord record;
    record.hp = hp;
    record.params = p;

    double window_loss = 0.0;
    std::size_t streamed = 0;
    for (std::size_t i = hp.k; i < train.rows(); ++i) {
        const auto x = train.row(i);
        window_loss += model.point_loss(x);
        model.step(x);
        last_sum += x.back();
        ++seen;
        ++streamed;
        if (streamed % window_size == 0) {
            WindowStats w;
            w.window_index = streamed / window_size;
            w.window_size = window_size;
            w.cumulative_loss = window_loss;
            w.per_method_error =
                detail::all_method_errors(model, test, p, last_sum / static_cast<double>(seen));
            record.windows.push_back(w);
            window_loss = 0.0;
        }
    }
    record.final_counts = model.counts();
    const double overall_mean = last_sum / static_cast<double>(seen);
    return {std::move(record), std::move(model), overall_mean};
}

enum class SweepAxis { k, alpha, beta };

inline std::string_view sweep_axis_name(SweepAxis a) {
    switch (a) {
    case SweepAxis::k: return "k";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::beta: return "beta";
    }
    return "?";
}

inline std::optional<SweepAxis> sweep_axis_from_name(std::string_view s) {
    if (s == "k") return SweepAxis::k;
    if (s == "alpha") return SweepAxis::alpha;
    if (s == "beta") return SweepAxis::beta;
    return std::nullopt;
}

// One hyperparameter axis swept over a value list, everything else fixed.
struct SweepSpec {
    SweepAxis axis = SweepAxis::k;
    std::vector<double> values;
    Hyperparams base_hp;
    InferenceParams base_params;
    std::string preset = "normal";
    std::size_t dim = 2;
    std::size_t n_points = 11000;
    double train_fraction = 10.0 / 11.0;
    std::size_t window_size = 1000;
    std::vector<std::uint64_t> seeds = {42};
    unsigned jobs = 1;

    void validate() const {
        if (values.empty()) throw std::invalid_argument("SweepSpec: values must be nonempty");
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t j = i + 1; j < values.size(); ++j)
                if (values[i] == values[j])
                    throw std::invalid_argument("SweepSpec: values must be distinct");
        if (axis == SweepAxis::k)
            for (const double v : values)
                if (v < 1.0 || v != std::floor(v))
                    throw std::invalid_argument("SweepSpec: k values must be positive integers");
        if (axis == SweepAxis::alpha)
            for (const double v : values)
                if (!(v > 0.0) || v > 1.0)
                    throw std::invalid_argument("SweepSpec: alpha values must be in (0, 1]");
        if (seeds.empty()) throw std::invalid_argument("SweepSpec: seeds must be nonempty");
        if (find_preset(preset) == nullptr)
            throw std::invalid_argument("SweepSpec: unknown preset '" + preset + "'");
        if (jobs < 1) throw std::invalid_argument("SweepSpec: jobs must be >= 1");
    }

    Hyperparams hp_for(double value) const {
        Hyperparams hp = base_hp;
        switch (axis) {
        case SweepAxis::k: hp.k = static_cast<std::size_t>(value); break;
        case SweepAxis::alpha: hp.alpha = value; break;
        case SweepAxis::beta: hp.beta = value; break;
        }
        return hp;
    }
};

// A run's seed fans out via SplitMix64 into the datagen seed and the split
// seed, so one seed pins the same dataset across every swept value.
struct RunData {
    Matrix train;
    Matrix test;
};

inline RunData prepare_run_data(std::string_view preset, std::size_t dim, std::size_t n_points,
                                double train_fraction, std::uint64_t seed) {
    std::uint64_t state = seed;
    const std::uint64_t gen_seed = splitmix64_next(state);
    const std::uint64_t split_seed = splitmix64_next(state);
    const Matrix data = generate(preset_spec(preset, dim, n_points, gen_seed));
    auto [train, test] = split(data, train_fraction, split_seed);
    return {std::move(train), std::move(test)};
}

// Outcome of one (value, seed) run; failures are isolated, not propagated.
struct SweepOutcome {
    double value = 0.0;
    std::uint64_t seed = 0;
    std::optional<RunRecord> record;
    std::string error;

    bool ok() const { return record.has_value(); }
};

// Runs |values| x |seeds| independent trainings (value-major order). Results
// land in their slot regardless of scheduling, so output is identical for any
// jobs count.
inline std::vector<SweepOutcome> sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t total = spec.values.size() * spec.seeds.size();
    std::vector<SweepOutcome> outcomes(total);

    auto run_one = [&](std::size_t slot) {
        const double value = spec.values[slot / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[slot % spec.seeds.size()];
        SweepOutcome& out = outcomes[slot];
        out.value = value;
        out.seed = seed;
        try {
            const Hyperparams hp = spec.hp_for(value);
            hp.validate();
            const RunData data = prepare_run_data(spec.preset, spec.dim, spec.n_points,
                                                  spec.train_fraction, seed);
            TrainResult result =
                run_training(data.train, data.test, hp, spec.base_params, spec.window_size);
            result.record.preset = spec.preset;
            result.record.seed = seed;
            out.record = std::move(result.record);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    const unsigned jobs = std::min<unsigned>(spec.jobs, static_cast<unsigned>(total));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= total) return;
                    run_one(i);
                }
            });
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

// Per swept value (seed-averaged): final-window loss, per-method mean
// inference error over the last three windows, final count variance.
struct SummaryRow {
    double value = 0.0;
    double final_loss = 0.0;
    std::array<double, 7> mean_error_last3{};
    Method best_method = Method::euclid;
    double best_method_error = 0.0;
    double final_count_variance = 0.0;
};

struct Summary {
    std::string preset;
    SweepAxis axis = SweepAxis::k;
    std::vector<SummaryRow> rows;
    double argmin_error_value = 0.0; // value whose best method error is smallest
    Method argmin_error_method = Method::euclid;
    double argmin_loss_value = 0.0;  // value with the smallest final-window loss
};

inline Summary summarize(const std::vector<RunRecord>& records, SweepAxis axis) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");

    auto axis_value = [axis](const RunRecord& r) {
        switch (axis) {
        case SweepAxis::k: return static_cast<double>(r.hp.k);
        case SweepAxis::alpha: return r.hp.alpha;
        case SweepAxis::beta: return r.hp.beta;
        }
        return 0.0;
    };

    Summary summary;
    summary.preset = records.front().preset;
    summary.axis = axis;

    std::vector<double> order; // first-seen value order
    std::map<double, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        const double v = axis_value(r);
        auto [it, inserted] = groups.try_emplace(v);
        if (inserted) order.push_back(v);
        it->second.push_back(&r);
    }

    for (const double v : order) {
        const auto& group = groups[v];
        SummaryRow row;
        row.value = v;
        for (const RunRecord* r : group) {
            if (r->windows.empty()) throw std::invalid_argument("summarize: record has no windows");
            row.final_loss += r->windows.back().cumulative_loss;
            row.final_count_variance += r->final_count_variance();
            const std::size_t last3 = std::min<std::size_t>(3, r->windows.size());
            for (std::size_t m = 0; m < 7; ++m) {
                double acc = 0.0;
                for (std::size_t w = r->windows.size() - last3; w < r->windows.size(); ++w)
                    acc += r->windows[w].per_method_error[m];
                row.mean_error_last3[m] += acc / static_cast<double>(last3);
            }
        }
        const double n = static_cast<double>(group.size());
        row.final_loss /= n;
        row.final_count_variance /= n;
        for (auto& e : row.mean_error_last3) e /= n;
        std::size_t best = 0;
        for (std::size_t m = 1; m < 7; ++m)
            if (row.mean_error_last3[m] < row.mean_error_last3[best]) best = m;
        row.best_method = kAllMethods[best];
        row.best_method_error = row.mean_error_last3[best];
        summary.rows.push_back(row);
    }

    const SummaryRow* best_err = &summary.rows.front();
    const SummaryRow* best_loss = &summary.rows.front();
    for (const auto& row : summary.rows) {
        if (row.best_method_error < best_err->best_method_error) best_err = &row;
        if (row.final_loss < best_loss->final_loss) best_loss = &row;
    }
    summary.argmin_error_value = best_err->value;
    summary.argmin_error_method = best_err->best_method;
    summary.argmin_loss_value = best_loss->value;
    return summary;
}

// RunRecord CSV: one row per (window, method).
inline std::string run_record_csv(const RunRecord& record, std::string_view run_id) {
    std::string out = "run_id,preset,k,alpha,beta,seed,window,loss,method,error,count_var\n";
    const std::string prefix = std::string(run_id) + "," + record.preset + "," +
                               format_int(static_cast<std::int64_t>(record.hp.k)) + "," +
                               format_double(record.hp.alpha) + "," +
                               format_double(record.hp.beta) + "," +
                               format_int(static_cast<std::int64_t>(record.seed));
    const std::string count_var = format_double(record.final_count_variance());
    for (const auto& w : record.windows)
        for (std::size_t m = 0; m < 7; ++m) {
            out += prefix;
            out += ',';
            out += format_int(static_cast<std::int64_t>(w.window_index));
            out += ',';
            out += format_double(w.cumulative_loss);
            out += ',';
            out += method_name(kAllMethods[m]);
            out += ',';
            out += format_double(w.per_method_error[m]);
            out += ',';
            out += count_var;
            out += '\n';
        }
    return out;
}

inline std::string summary_csv(const Summary& summary) {
    std::string out = "preset,axis,value,final_loss,mean_error_last3,best_method\n";
    for (const auto& row : summary.rows) {
        out += summary.preset;
        out += ',';
        out += sweep_axis_name(summary.axis);
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.final_loss);
        out += ',';
        out += format_double(row.best_method_error);
        out += ',';
        out += method_name(row.best_method);
        out += '\n';
    }
    return out;
}

} // namespace obkm
