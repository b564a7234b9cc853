// obkm: generate synthetic datasets, train online balanced k-means models,
// run the seven inference methods, and sweep hyperparameters to CSV.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obkm/obkm.hpp"

namespace fs = std::filesystem;
using namespace obkm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

// Shared knobs; --seed fans out per command exactly like the sweep harness
// (SplitMix64: first derived value -> generation, second -> split).
struct CommonOpts {
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    unsigned jobs = 1;
};

struct ModelOpts {
    std::size_t k = 300;
    double alpha = 0.6;
    double beta = 0.07;
    std::string distance = "euclidean";

    Hyperparams hyperparams() const {
        Hyperparams hp;
        hp.k = k;
        hp.alpha = alpha;
        hp.beta = beta;
        const auto mode = distance_mode_from_name(distance);
        if (!mode)
            throw std::invalid_argument("--distance must be euclidean or squared_euclidean");
        hp.distance = *mode;
        hp.validate();
        return hp;
    }
};

struct InferOpts {
    double temperature = 1.0;
    std::size_t neighbors = 5;
    double merge_alpha = 0.5;
    double cs_beta = 1.0;
    bool cs_exp_literal = false;

    InferenceParams params() const {
        InferenceParams p;
        p.temperature = temperature;
        p.neighbor_count = neighbors;
        p.merge_alpha = merge_alpha;
        p.cs_beta = cs_beta;
        p.normalize_cs_exp = !cs_exp_literal;
        return p;
    }
};

void add_model_opts(CLI::App* cmd, ModelOpts& m) {
    cmd->add_option("--k", m.k, "Cluster count");
    cmd->add_option("--alpha", m.alpha, "Learning rate in (0,1]");
    cmd->add_option("--beta", m.beta, "Balancing scale");
    cmd->add_option("--distance", m.distance, "euclidean | squared_euclidean");
}

void add_infer_opts(CLI::App* cmd, InferOpts& i) {
    cmd->add_option("--temperature", i.temperature, "Softmax temperature (> 0)");
    cmd->add_option("--neighbors", i.neighbors, "Neighbor count for the cluster-size methods");
    cmd->add_option("--merge-alpha", i.merge_alpha, "Mixing coefficient of the merged methods");
    cmd->add_option("--cs-beta", i.cs_beta, "Exponent scale of cs_exp");
    cmd->add_flag("--cs-exp-literal", i.cs_exp_literal,
                  "Skip normalizing the cs_exp weights (literal formula)");
}

// "100:1000:100" (inclusive range) or a comma list "0.2,0.4,0.6".
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    const auto fields = split_fields(text, ',');
    if (fields.size() == 1 && text.find(':') != std::string::npos) {
        const auto parts = split_fields(text, ':');
        if (parts.size() != 3) throw std::invalid_argument("range syntax is start:stop:step");
        const double start = parse_double(parts[0]);
        const double stop = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || stop < start)
            throw std::invalid_argument("range needs stop >= start and step > 0");
        for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
        return out;
    }
    for (const auto f : fields) out.push_back(parse_double(f));
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto f : split_fields(text, ',')) {
        const double v = parse_double(f);
        if (v < 0.0 || v != std::floor(v))
            throw std::invalid_argument("seeds must be nonnegative integers");
        out.push_back(static_cast<std::uint64_t>(v));
    }
    if (out.empty()) throw std::invalid_argument("--seeds must list at least one seed");
    return out;
}

// Inline component syntax: family(a,b)[:relation[:fraction]], e.g.
// "normal(0,1)", "uniform(5,7):independent:0.5", "normal(0,1):sum_of_squares".
Component parse_component(const std::string& text, bool& saw_fraction) {
    const auto open = text.find('(');
    const auto close = text.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("component '" + text + "': expected family(a,b)");
    const std::string family = text.substr(0, open);
    const auto args = split_fields(std::string_view(text).substr(open + 1, close - open - 1), ',');
    if (args.size() != 2)
        throw std::invalid_argument("component '" + text + "': expected two parameters");

    Component comp;
    comp.dist.a = parse_double(args[0]);
    comp.dist.b = parse_double(args[1]);
    if (family == "uniform") comp.dist.family = DistributionSpec::Family::uniform;
    else if (family == "normal") comp.dist.family = DistributionSpec::Family::normal;
    else if (family == "gamma") comp.dist.family = DistributionSpec::Family::gamma;
    else throw std::invalid_argument("component '" + text + "': unknown family '" + family + "'");

    saw_fraction = false;
    std::string rest = text.substr(close + 1);
    if (!rest.empty() && rest.front() == ':') rest.erase(0, 1);
    if (!rest.empty()) {
        const auto parts = split_fields(rest, ':');
        if (parts.size() > 2)
            throw std::invalid_argument("component '" + text + "': too many fields");
        const std::string relation(parts[0]);
        if (relation == "independent") comp.relation = RelationTransform::independent;
        else if (relation == "sum_of_squares") comp.relation = RelationTransform::sum_of_squares;
        else if (relation == "sum_of_cubes") comp.relation = RelationTransform::sum_of_cubes;
        else throw std::invalid_argument("component '" + text + "': unknown relation '" +
                                         relation + "'");
        if (parts.size() == 2) {
            comp.fraction = parse_double(parts[1]);
            saw_fraction = true;
        }
    }
    return comp;
}

std::string preset_names() {
    std::string out;
    for (const auto& [name, spec] : dataset_presets()) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

std::string run_id(SweepAxis axis, double value, std::uint64_t seed) {
    return std::string(sweep_axis_name(axis)) + format_double(value) + "_s" +
           format_int(static_cast<std::int64_t>(seed));
}

// ---- generate ----

struct GenerateArgs {
    std::string preset;
    std::vector<std::string> components;
    std::size_t dim = 2;
    std::size_t n = 11000;
    std::string out;
};

int cmd_generate(const CommonOpts& common, const GenerateArgs& args) {
    DataSpec spec;
    if (!args.preset.empty()) {
        if (!args.components.empty())
            throw std::invalid_argument("--preset and --component are mutually exclusive");
        if (find_preset(args.preset) == nullptr)
            throw std::invalid_argument("unknown preset '" + args.preset +
                                        "' (available: " + preset_names() + ")");
        spec = preset_spec(args.preset, args.dim, args.n, common.seed);
    } else {
        if (args.components.empty())
            throw std::invalid_argument("need --preset or at least one --component");
        bool any_fraction = false;
        for (const auto& text : args.components) {
            bool saw = false;
            spec.components.push_back(parse_component(text, saw));
            any_fraction = any_fraction || saw;
        }
        if (!any_fraction)
            for (auto& c : spec.components)
                c.fraction = 1.0 / static_cast<double>(spec.components.size());
        spec.dim = args.dim;
        spec.n_points = args.n;
        spec.seed = common.seed;
        spec.validate();
    }

    const fs::path out =
        args.out.empty() ? fs::path(common.out_dir) / "data.csv" : fs::path(args.out);
    const Matrix data = generate(spec);
    fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    write_dataset_csv(out, data);
    std::cout << "wrote " << out.string() << " (" << data.rows() << " rows, dim " << data.cols()
              << ")\n";
    return kExitOk;
}

// ---- train ----

struct TrainArgs {
    std::string data;
    ModelOpts model;
    InferOpts infer;
    std::size_t window = 1000;
    double train_frac = 10.0 / 11.0;
    std::string model_out;
    std::string runs_out;
};

int cmd_train(const CommonOpts& common, const TrainArgs& args) {
    const Hyperparams hp = args.model.hyperparams();
    const InferenceParams p = args.infer.params();
    p.validate(hp.k);

    const Matrix data = read_dataset_csv(args.data);
    std::uint64_t state = common.seed;
    splitmix64_next(state); // generation slot, unused: the dataset is given
    const std::uint64_t split_seed = splitmix64_next(state);
    auto [train, test] = split(data, args.train_frac, split_seed);

    TrainResult result = run_training(train, test, hp, p, args.window);
    result.record.preset = fs::path(args.data).stem().string();
    result.record.seed = common.seed;

    fs::create_directories(common.out_dir);
    const fs::path model_path = args.model_out.empty() ? fs::path(common.out_dir) / "model.json"
                                                       : fs::path(args.model_out);
    const fs::path runs_path = args.runs_out.empty() ? fs::path(common.out_dir) / "windows.csv"
                                                     : fs::path(args.runs_out);
    for (const auto& p : {model_path, runs_path})
        if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
    save_model(model_path, result.model, result.overall_mean);
    const std::string id =
        "train_s" + format_int(static_cast<std::int64_t>(common.seed));
    atomic_write_text(runs_path, run_record_csv(result.record, id));

    std::cout << "wrote " << model_path.string() << "\n";
    std::cout << "wrote " << runs_path.string() << " (" << result.record.windows.size()
              << " windows x 7 methods)\n";
    if (!result.record.windows.empty())
        std::cout << "final window loss: "
                  << format_double(result.record.windows.back().cumulative_loss) << "\n";
    return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
    std::string preset;
    std::string axis = "k";
    std::string values;
    std::string seeds = "42";
    std::size_t dim = 2;
    std::size_t n = 11000;
    double train_frac = 10.0 / 11.0;
    std::size_t window = 1000;
    ModelOpts model;
    InferOpts infer;
};

int cmd_sweep(const CommonOpts& common, const SweepArgs& args) {
    SweepSpec spec;
    const auto axis = sweep_axis_from_name(args.axis);
    if (!axis) throw std::invalid_argument("--axis must be one of k, alpha, beta");
    spec.axis = *axis;
    spec.values = parse_values(args.values);
    spec.seeds = parse_seeds(args.seeds);
    spec.base_hp = args.model.hyperparams();
    spec.base_params = args.infer.params();
    spec.preset = args.preset;
    spec.dim = args.dim;
    spec.n_points = args.n;
    spec.train_fraction = args.train_frac;
    spec.window_size = args.window;
    spec.jobs = common.jobs;
    spec.validate();

    const auto outcomes = sweep(spec);

    fs::create_directories(common.out_dir);
    std::vector<RunRecord> successes;
    bool any_failed = false;
    for (const auto& o : outcomes) {
        const std::string id = run_id(spec.axis, o.value, o.seed);
        if (o.ok()) {
            const fs::path path = fs::path(common.out_dir) / ("run_" + id + ".csv");
            atomic_write_text(path, run_record_csv(*o.record, id));
            std::cout << "wrote " << path.string() << "\n";
            successes.push_back(*o.record);
        } else {
            any_failed = true;
            std::cerr << "error: run " << id << ": " << one_line(o.error) << "\n";
        }
    }

    if (!successes.empty()) {
        const Summary summary = summarize(successes, spec.axis);
        const fs::path path = fs::path(common.out_dir) / "summary.csv";
        atomic_write_text(path, summary_csv(summary));
        std::cout << "wrote " << path.string() << "\n";
        std::cout << "argmin error: " << sweep_axis_name(spec.axis) << "="
                  << format_double(summary.argmin_error_value) << " ("
                  << method_name(summary.argmin_error_method) << ")\n";
        std::cout << "argmin loss: " << sweep_axis_name(spec.axis) << "="
                  << format_double(summary.argmin_loss_value) << "\n";
    }
    return any_failed ? kExitRuntime : kExitOk;
}

// ---- infer ----

struct InferArgs {
    std::string model;
    std::string queries;
    std::string out;
    InferOpts infer;
    std::optional<double> overall_mean;
};

int cmd_infer(const CommonOpts& common, const InferArgs& args) {
    const LoadedModel loaded = load_model(args.model);
    const InferenceParams p = args.infer.params();
    p.validate(loaded.model.k());

    std::optional<double> overall_mean = args.overall_mean;
    if (!overall_mean) overall_mean = loaded.overall_mean;
    if (!overall_mean)
        throw std::invalid_argument(
            "snapshot carries no overall_mean; pass --overall-mean for mean_merge");

    const Matrix queries = read_dataset_csv(args.queries);
    if (queries.cols() != loaded.model.dim() - 1)
        throw std::invalid_argument("queries must have " +
                                    std::to_string(loaded.model.dim() - 1) +
                                    " columns (model dim minus one), got " +
                                    std::to_string(queries.cols()));

    std::string csv = "query_id,method,estimate\n";
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const auto estimates = infer_all(loaded.model, queries.row(i), p, *overall_mean);
        for (const auto& e : estimates) {
            csv += format_int(static_cast<std::int64_t>(i));
            csv += ',';
            csv += method_name(e.method);
            csv += ',';
            csv += format_double(e.value);
            csv += '\n';
        }
    }

    const fs::path out = args.out.empty() ? fs::path(common.out_dir) / "predictions.csv"
                                          : fs::path(args.out);
    fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    atomic_write_text(out, csv);
    std::cout << "wrote " << out.string() << " (" << queries.rows() << " queries x 7 methods)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"online balanced k-means: datasets, training, inference, sweeps"};
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Key-value config file (INI/TOML); flags override it");

    CommonOpts common;
    app.add_option("--seed", common.seed, "Base seed; fully determines all outputs");
    app.add_option("--out-dir", common.out_dir, "Directory for output files");
    app.add_option("--jobs", common.jobs, "Parallel runs in sweeps")->check(CLI::PositiveNumber);

    GenerateArgs gen_args;
    CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
    gen->fallthrough();
    gen->add_option("--preset", gen_args.preset, "Named dataset recipe");
    gen->add_option("--component", gen_args.components,
                    "Inline component: family(a,b)[:relation[:fraction]] (repeatable)");
    gen->add_option("--dim", gen_args.dim, "Point dimension (>= 2)");
    gen->add_option("--n", gen_args.n, "Number of points");
    gen->add_option("--out", gen_args.out, "Output CSV path (default <out-dir>/data.csv)");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train a model and record window stats");
    train->fallthrough();
    train->add_option("--data", train_args.data, "Dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    add_model_opts(train, train_args.model);
    add_infer_opts(train, train_args.infer);
    train->add_option("--window", train_args.window, "Assignments per window");
    train->add_option("--train-frac", train_args.train_frac, "Train fraction of the split");
    train->add_option("--model-out", train_args.model_out,
                      "Model snapshot path (default <out-dir>/model.json)");
    train->add_option("--runs-out", train_args.runs_out,
                      "Window CSV path (default <out-dir>/windows.csv)");

    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one hyperparameter axis");
    sweep_cmd->fallthrough();
    sweep_cmd->add_option("--preset", sweep_args.preset, "Dataset recipe")->required();
    sweep_cmd->add_option("--axis", sweep_args.axis, "k | alpha | beta")->required();
    sweep_cmd->add_option("--values", sweep_args.values,
                          "Comma list (0.2,0.4) or range (100:1000:100)")
        ->required();
    sweep_cmd->add_option("--seeds", sweep_args.seeds, "Comma list of run seeds");
    sweep_cmd->add_option("--dim", sweep_args.dim, "Point dimension");
    sweep_cmd->add_option("--n", sweep_args.n, "Points per generated dataset");
    sweep_cmd->add_option("--train-frac", sweep_args.train_frac, "Train fraction of the split");
    sweep_cmd->add_option("--window", sweep_args.window, "Assignments per window");
    add_model_opts(sweep_cmd, sweep_args.model);
    add_infer_opts(sweep_cmd, sweep_args.infer);

    InferArgs infer_args;
    CLI::App* infer = app.add_subcommand("infer", "Estimate the last coordinate of queries");
    infer->fallthrough();
    infer->add_option("--model", infer_args.model, "Model snapshot JSON")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--queries", infer_args.queries, "Query CSV with dim-1 columns")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--out", infer_args.out,
                      "Predictions CSV path (default <out-dir>/predictions.csv)");
    add_infer_opts(infer, infer_args.infer);
    double overall_mean_flag = 0.0;
    CLI::Option* om =
        infer->add_option("--overall-mean", overall_mean_flag,
                          "Override the training mean used by mean_merge");

    try {
        app.parse(argc, argv);
        if (om->count() > 0) infer_args.overall_mean = overall_mean_flag;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: validation: " << one_line(e.what()) << "\n";
        return kExitValidation;
    }

    try {
        if (gen->parsed()) return cmd_generate(common, gen_args);
        if (train->parsed()) return cmd_train(common, train_args);
        if (sweep_cmd->parsed()) return cmd_sweep(common, sweep_args);
        if (infer->parsed()) return cmd_infer(common, infer_args);
        std::cerr << "error: validation: no subcommand given\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: validation: " << one_line(e.what()) << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
        return kExitRuntime;
    }
}
