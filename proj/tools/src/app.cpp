#include "fedcurr/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "fedcurr/error.hpp"
#include "fedcurr/format.hpp"
#include "fedcurr/parallel.hpp"

namespace fedcurr::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTestSeedOffset = 0x9E3779B97F4A7C15ULL;

ModelKind parse_model_kind(std::string_view s) {
    if (s == "linear") return ModelKind::LinearRegression;
    if (s == "softmax") return ModelKind::SoftmaxRegression;
    if (s == "mlp") return ModelKind::MlpTanh;
    throw ConfigError("unknown model kind '" + std::string(s) + "' (linear, softmax, mlp)");
}

PartitionScheme parse_scheme(std::string_view s) {
    if (s == "iid") return PartitionScheme::IID;
    if (s == "dirichlet") return PartitionScheme::Dirichlet;
    if (s == "label_skew") return PartitionScheme::LabelSkew;
    throw ConfigError("unknown partition scheme '" + std::string(s) + "' (iid, dirichlet, label_skew)");
}

// Runs `fn` and re-raises a core ConfigError with the file location of `section.key`.
template <typename Fn>
auto at_key(const ConfigFile& file, std::string_view section, std::string_view key, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        const int line = file.line_of(section, key);
        throw ConfigError(file.located(line, e.what()), line);
    }
}

SgdHyper read_hyper(const ConfigFile& f, std::string_view section, SgdHyper h) {
    f.require_known(section, {"eta0", "decay_alpha", "decay_b", "momentum", "weight_decay", "batch_size", "epochs"});
    h.eta0 = f.get_real(section, "eta0", h.eta0);
    h.decay_alpha = f.get_real(section, "decay_alpha", h.decay_alpha);
    h.decay_b = f.get_real(section, "decay_b", h.decay_b);
    h.momentum = f.get_real(section, "momentum", h.momentum);
    h.weight_decay = f.get_real(section, "weight_decay", h.weight_decay);
    h.batch_size = f.get_count(section, "batch_size", h.batch_size);
    at_key(f, section, "", [&] { h.validate(); });
    return h;
}

fs::path resolve_path(const ConfigFile& f, std::string_view section, std::string_view key, const fs::path& base) {
    fs::path p = f.get_string(section, key);
    if (p.is_relative() && !base.empty()) p = base / p;
    if (!fs::exists(p)) {
        const int line = f.line_of(section, key);
        throw ConfigError(f.located(line, "file '" + p.string() + "' does not exist"), line);
    }
    return p;
}

template <typename T, typename Parse>
T parse_enum(const ConfigFile& f, std::string_view section, std::string_view key, T fallback, Parse parse) {
    if (!f.has(section, key)) return fallback;
    return at_key(f, section, key, [&] { return parse(f.get_string(section, key)); });
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace

bool RunConfig::needs_expert() const {
    return f_ord.has_value() || (curriculum && curriculum->scoring == ScoringMethod::Expert);
}

RunConfig load_run_config(const ConfigFile& f, const fs::path& base_dir) {
    for (const auto& s : f.sections()) {
        static const std::vector<std::string> known = {"experiment", "model",  "data",   "partition", "optimizer",
                                                      "curriculum", "client_curriculum", "expert", "output"};
        if (std::find(known.begin(), known.end(), s) == known.end()) {
            const int line = f.line_of(s, "");
            throw ConfigError(f.located(line, "unknown section [" + s + "]"), line);
        }
    }
    f.require_known("", {});

    RunConfig rc;
    ExperimentConfig& ex = rc.experiment;

    f.require_known("experiment", {"seed", "trials", "rounds", "num_clients", "participation", "local_epochs",
                                   "algorithm", "prox_mu", "arms"});
    ex.seed = f.get_u64("experiment", "seed", 202207);
    rc.trials = f.get_count("experiment", "trials", 3);
    if (rc.trials == 0) {
        const int line = f.line_of("experiment", "trials");
        throw ConfigError(f.located(line, "'experiment.trials' must be at least 1"), line);
    }
    ex.rounds = f.get_count("experiment", "rounds");
    ex.num_clients = f.get_count("experiment", "num_clients");
    ex.participation = f.get_count("experiment", "participation", 10);
    ex.local_epochs = f.get_count("experiment", "local_epochs", 10);
    ex.algorithm = parse_enum(f, "experiment", "algorithm", Algorithm::FedAvg, parse_algorithm);
    ex.prox_mu = f.get_real("experiment", "prox_mu", 0.01);

    f.require_known("model", {"kind", "hidden_dim"});
    ex.model.kind = at_key(f, "model", "kind", [&] { return parse_model_kind(f.get_string("model", "kind")); });
    ex.model.hidden_dim = f.get_count("model", "hidden_dim", ex.model.kind == ModelKind::MlpTanh ? 16 : 0);

    f.require_known("data", {"n", "test_n", "classes", "dim", "noise_low", "noise_high", "file", "test_file"});
    if (f.has("data", "file")) {
        rc.dataset_file = resolve_path(f, "data", "file", base_dir);
        rc.test_file = resolve_path(f, "data", "test_file", base_dir);
    } else {
        rc.n = f.get_count("data", "n");
        rc.dim = f.get_count("data", "dim");
        rc.classes = f.get_count("data", "classes", 2);
        rc.test_n = f.get_count("data", "test_n", std::max<std::size_t>(rc.n / 4, rc.classes));
        rc.noise_low = f.get_real("data", "noise_low", 0.1);
        rc.noise_high = f.get_real("data", "noise_high", 2.0);
    }

    f.require_known("partition", {"scheme", "beta", "k", "f_ord", "file"});
    rc.partition.num_clients = ex.num_clients;
    if (f.has("partition", "file")) {
        rc.partition_file = resolve_path(f, "partition", "file", base_dir);
    } else {
        rc.partition.scheme = at_key(f, "partition", "scheme",
                                     [&] { return parse_scheme(f.get_string("partition", "scheme")); });
        rc.partition.beta = f.get_real("partition", "beta", 0.5);
        rc.partition.classes_per_client = f.get_count("partition", "k", 2);
    }
    if (f.has("partition", "f_ord")) {
        const double v = f.get_real("partition", "f_ord");
        if (!(v >= 0.0 && v <= 1.0)) {
            const int line = f.line_of("partition", "f_ord");
            throw ConfigError(f.located(line, "'partition.f_ord' must lie in [0, 1]"), line);
        }
        rc.f_ord = v;
        rc.partition.f_ord = v;
    }

    ex.hyper = read_hyper(f, "optimizer", SgdHyper{});
    if (f.has("optimizer", "epochs")) {
        const int line = f.line_of("optimizer", "epochs");
        throw ConfigError(f.located(line, "use 'experiment.local_epochs' for local training epochs"), line);
    }

    if (f.has_section("curriculum")) {
        f.require_known("curriculum", {"scoring", "pacing", "a", "b"});
        DataCurriculum dc;
        dc.scoring = parse_enum(f, "curriculum", "scoring", ScoringMethod::GLoss, parse_scoring_method);
        dc.family = parse_enum(f, "curriculum", "pacing", PacingFamily::Linear, parse_pacing_family);
        dc.a = f.get_real("curriculum", "a", 0.8);
        dc.b = f.get_real("curriculum", "b", 0.2);
        rc.curriculum = dc;
    }

    if (f.has_section("client_curriculum")) {
        f.require_known("client_curriculum", {"pacing", "a", "b", "ordering", "batch_size"});
        ClientCurriculum cc;
        cc.family = parse_enum(f, "client_curriculum", "pacing", PacingFamily::Linear, parse_pacing_family);
        cc.a = f.get_real("client_curriculum", "a", 0.8);
        cc.b = f.get_real("client_curriculum", "b", 0.2);
        cc.ordering = parse_enum(f, "client_curriculum", "ordering", Ordering::Curriculum, parse_ordering);
        cc.client_batch_size = f.get_count("client_curriculum", "batch_size", 10);
        ex.client_curriculum = cc;
    }

    const std::vector<std::string> arm_names =
        f.has("experiment", "arms")
            ? f.get_list("experiment", "arms")
            : (rc.curriculum ? std::vector<std::string>{"vanilla", "curriculum", "anti", "random"}
                             : std::vector<std::string>{"vanilla"});
    for (const auto& name : arm_names) {
        Arm arm{name, std::nullopt};
        if (name != "vanilla") {
            arm.ordering = at_key(f, "experiment", "arms", [&] { return parse_ordering(name); });
            if (!rc.curriculum) {
                const int line = f.line_of("experiment", "arms");
                throw ConfigError(f.located(line, "arm '" + name + "' needs a [curriculum] section"), line);
            }
        }
        for (const auto& other : rc.arms)
            if (other.name == name) {
                const int line = f.line_of("experiment", "arms");
                throw ConfigError(f.located(line, "arm '" + name + "' listed twice"), line);
            }
        rc.arms.push_back(std::move(arm));
    }

    SgdHyper expert_defaults;
    expert_defaults.eta0 = 0.05;
    rc.expert_hyper = read_hyper(f, "expert", expert_defaults);
    rc.expert_epochs = f.get_count("expert", "epochs", 20);

    f.require_known("output", {"dir", "dump_scores", "save_data"});
    if (f.has("output", "dir")) {
        rc.out_dir = f.get_string("output", "dir");
        if (rc.out_dir.is_relative() && !base_dir.empty()) rc.out_dir = base_dir / rc.out_dir;
    }
    rc.dump_scores = f.get_bool("output", "dump_scores", false);
    rc.save_data = f.get_bool("output", "save_data", false);

    // Structural validation against a stand-in model shape; the real input
    // dimension is only known once the dataset exists.
    ExperimentConfig probe = ex;
    probe.model.input_dim = std::max<std::size_t>(rc.dim, 1);
    probe.model.num_classes = rc.dataset_file ? std::max<std::size_t>(probe.model.num_classes, 2) : rc.classes;
    if (rc.curriculum) probe.data_curriculum = rc.curriculum;
    if (rc.curriculum && rc.curriculum->scoring == ScoringMethod::Expert) probe.expert_params = ParamVector(1);
    at_key(f, "experiment", "", [&] { probe.validate(); });
    return rc;
}

TrialData prepare_trial(const RunConfig& cfg, std::uint64_t trial_seed) {
    TrialData td;
    if (cfg.dataset_file) {
        std::ifstream in(*cfg.dataset_file);
        td.train = read_dataset(in);
        std::ifstream tin(*cfg.test_file);
        td.test = read_dataset(tin).samples;
    } else {
        td.train = gen_synthetic(cfg.n, cfg.classes, cfg.dim, cfg.noise_low, cfg.noise_high, trial_seed);
        td.test = gen_synthetic(cfg.test_n, cfg.classes, cfg.dim, cfg.noise_low, cfg.noise_high,
                                trial_seed + kTestSeedOffset)
                      .samples;
    }

    ModelSpec spec = cfg.experiment.model;
    spec.input_dim = td.train.dim();
    spec.num_classes = td.train.num_classes;
    if (cfg.needs_expert())
        td.expert = train_centralized(spec, td.train.samples, cfg.expert_hyper, cfg.expert_epochs, trial_seed);

    if (cfg.partition_file) {
        std::ifstream in(*cfg.partition_file);
        td.partition = read_partition(in, td.train);
        if (td.partition.num_clients() != cfg.experiment.num_clients)
            throw ConfigError("partition file has " + std::to_string(td.partition.num_clients()) +
                              " clients but experiment.num_clients is " +
                              std::to_string(cfg.experiment.num_clients));
    } else {
        PartitionSpec ps = cfg.partition;
        ps.seed = trial_seed;
        td.partition = partition(td.train, ps);
    }
    if (cfg.f_ord) {
        const auto losses = per_sample_losses(spec, *td.expert, td.train.samples);
        td.partition = partition_difficulty(td.train, td.partition, *cfg.f_ord, losses, trial_seed);
    }
    return td;
}

ExperimentConfig arm_config(const RunConfig& cfg, const Arm& arm, const TrialData& data, std::uint64_t trial_seed) {
    ExperimentConfig ex = cfg.experiment;
    ex.seed = trial_seed;
    ex.model.input_dim = data.train.dim();
    ex.model.num_classes = data.train.num_classes;
    if (arm.ordering) {
        ex.data_curriculum = *cfg.curriculum;
        ex.data_curriculum->ordering = *arm.ordering;
    }
    if (data.expert) ex.expert_params = *data.expert;
    return ex;
}

RunOutput execute_run(const RunConfig& cfg, std::size_t threads) {
    threads = std::max<std::size_t>(threads, 1);
    const std::size_t trials = cfg.trials;
    const std::size_t arms = cfg.arms.size();
    const std::uint64_t seed0 = cfg.experiment.seed;

    std::vector<TrialData> data(trials);
    parallel_for(trials, threads, [&](std::size_t i) { data[i] = prepare_trial(cfg, seed0 + i); });

    if (cfg.save_data) {
        for (std::size_t i = 0; i < trials; ++i) {
            std::ostringstream ds;
            write_dataset(ds, data[i].train);
            write_file(cfg.out_dir / "data" / ("trial" + std::to_string(i) + "_dataset.txt"), ds.str());
            std::ostringstream ps;
            write_partition(ps, data[i].partition);
            write_file(cfg.out_dir / "data" / ("trial" + std::to_string(i) + "_partition.txt"), ps.str());
        }
    }

    const std::size_t jobs = trials * arms;
    const std::size_t outer = std::min(threads, jobs);
    const std::size_t inner = std::max<std::size_t>(1, threads / std::max<std::size_t>(outer, 1));
    std::vector<std::string> chunks(jobs);
    std::vector<double> final_acc(jobs, 0.0);
    parallel_for(jobs, outer, [&](std::size_t job) {
        const std::size_t trial = job / arms;
        const Arm& arm = cfg.arms[job % arms];
        ExperimentConfig ex = arm_config(cfg, arm, data[trial], seed0 + trial);
        ex.threads = inner;
        if (cfg.dump_scores) {
            const fs::path dir = cfg.out_dir / "scores" / ("trial" + std::to_string(trial) + "_" + arm.name);
            fs::create_directories(dir);
            ex.on_scores = [dir](std::size_t round, std::size_t client, const ScoreTable& table) {
                std::ostringstream os;
                write_score_table_csv(os, table);
                write_file(dir / ("round" + std::to_string(round) + "_client" + std::to_string(client) + ".csv"),
                           os.str());
            };
        }
        const auto rows = run_experiment(ex, data[trial].train, data[trial].partition, data[trial].test);
        std::ostringstream os;
        write_metrics_rows(os, run_labels(ex), rows);
        chunks[job] = os.str();
        final_acc[job] = rows.empty() ? 0.0 : rows.back().test_acc;
    });

    RunOutput out;
    out.metrics_csv = std::string(kMetricsHeader) + "\n";
    for (const auto& c : chunks) out.metrics_csv += c;

    out.summary_csv = "arm,trials,final_acc_mean,final_acc_std\n";
    for (std::size_t a = 0; a < arms; ++a) {
        ArmSummary s;
        s.arm = cfg.arms[a].name;
        s.trials = trials;
        for (std::size_t t = 0; t < trials; ++t) s.mean += final_acc[t * arms + a];
        s.mean /= static_cast<double>(trials);
        if (trials > 1) {
            double ss = 0.0;
            for (std::size_t t = 0; t < trials; ++t) {
                const double d = final_acc[t * arms + a] - s.mean;
                ss += d * d;
            }
            s.stddev = std::sqrt(ss / static_cast<double>(trials - 1));
        }
        out.summary_csv += s.arm + "," + std::to_string(s.trials) + "," + format_real(s.mean) + "," +
                           format_real(s.stddev) + "\n";
        out.summary.push_back(s);
    }
    return out;
}

VerifyConfig load_verify_config(const ConfigFile& f, const fs::path& base_dir) {
    VerifyConfig vc;
    f.require_known("", {});
    f.require_known("verify", {"seed", "runs", "out"});
    vc.seed = f.get_u64("verify", "seed", 202207);
    vc.runs = f.get_count("verify", "runs", 500);
    if (vc.runs < 100) {
        const int line = f.line_of("verify", "runs");
        throw ConfigError(f.located(line, "verify.runs must be at least 100"), line);
    }
    if (f.has("verify", "out")) {
        vc.out_dir = f.get_string("verify", "out");
        if (vc.out_dir.is_relative() && !base_dir.empty()) vc.out_dir = base_dir / vc.out_dir;
    }
    for (const auto& s : f.sections()) {
        if (s == "verify") continue;
        if (s.rfind("case.", 0) != 0 || s.size() == 5) {
            const int line = f.line_of(s, "");
            throw ConfigError(f.located(line, "unknown section [" + s + "] (expected [verify] or [case.<id>])"), line);
        }
        f.require_known(s, {"problem", "dim", "T", "J", "Q", "alpha", "stepsize", "mu", "L", "M", "sigma",
                            "schedule", "b_start", "b_end", "reverse", "start_distance", "bound_form", "start"});
        VerifyCase c;
        c.id = s.substr(5);
        const std::string problem = f.get_string(s, "problem");
        if (problem != "convex" && problem != "nonconvex") {
            const int line = f.line_of(s, "problem");
            throw ConfigError(f.located(line, "'" + s + ".problem' must be convex or nonconvex"), line);
        }
        c.convex = problem == "convex";
        c.dim = f.get_count(s, "dim", c.convex ? 8 : 4);
        c.rounds = f.get_count(s, "T", 20);
        c.local_steps = f.get_count(s, "J", 5);
        c.cohort = f.get_count(s, "Q", 4);
        const std::string stepsize = f.get_string(s, "stepsize", "constant");
        if (stepsize != "constant" && stepsize != "diminishing") {
            const int line = f.line_of(s, "stepsize");
            throw ConfigError(f.located(line, "'" + s + ".stepsize' must be constant or diminishing"), line);
        }
        c.diminishing = stepsize == "diminishing";
        c.sigma = f.get_real(s, "sigma", 0.1);
        if (c.convex) {
            c.mu = f.get_real(s, "mu", 0.5);
            c.lipschitz = f.get_real(s, "L", 4.0);
            c.relative_noise = f.get_real(s, "M", 1.0);
            c.schedule = parse_enum(f, s, "schedule", theory::BiasKind::ClientBased, theory::parse_bias_kind);
            c.b_start = f.get_real(s, "b_start", 0.0);
            c.b_end = f.get_real(s, "b_end", 0.5);
            c.reverse = f.get_bool(s, "reverse", false);
            c.start_distance = f.get_real(s, "start_distance", 1.0);
            const std::string form = f.get_string(s, "bound_form", "corrected");
            if (form != "corrected" && form != "as_printed") {
                const int line = f.line_of(s, "bound_form");
                throw ConfigError(f.located(line, "'" + s + ".bound_form' must be corrected or as_printed"), line);
            }
            c.form = form == "corrected" ? theory::ConvexBoundForm::Corrected : theory::ConvexBoundForm::AsPrinted;
            const std::string alpha = f.get_string(s, "alpha", "auto");
            c.alpha = alpha == "auto" ? 1.0 / (8.0 * (3.0 + 2.0 * c.relative_noise) * c.lipschitz)
                                      : f.get_real(s, "alpha");
        } else {
            c.alpha = f.get_real(s, "alpha");
            c.start_value = f.get_real(s, "start", 0.5);
        }
        if (!(c.alpha > 0.0)) {
            const int line = f.line_of(s, "alpha");
            throw ConfigError(f.located(line, "'" + s + ".alpha' must be positive"), line);
        }
        vc.cases.push_back(c);
    }
    return vc;
}

theory::ReportRow run_verify_case(const VerifyCase& c, std::size_t runs, std::uint64_t seed, std::size_t threads) {
    using namespace theory;
    const StepsizeSchedule steps = c.diminishing ? diminishing_stepsize(c.rounds, c.local_steps, c.alpha)
                                                 : constant_stepsize(c.rounds, c.local_steps, c.alpha);
    ReportRow row;
    row.case_id = c.id;
    row.rounds = c.rounds;
    row.local_steps = c.local_steps;
    row.cohort = c.cohort;
    if (c.convex) {
        const ConvexProblem problem = ConvexProblem::make(c.dim, c.mu, c.lipschitz, seed);
        BiasSchedule bias = make_bias_schedule(c.schedule, c.rounds, c.local_steps, c.b_start, c.b_end);
        if (c.reverse) bias = reversed(bias);
        ConvexBoundInputs in;
        in.problem = &problem;
        in.stepsizes = &steps;
        in.bias = &bias;
        in.noise = NoiseModel{c.relative_noise, c.sigma};
        in.cohort = c.cohort;
        in.start = point_at_distance(problem.optimum, c.start_distance, seed);
        in.form = c.form;
        row.schedule = std::string(to_string(c.schedule)) + (c.reverse ? "-reversed" : "");
        row.report = verify_convex(in, runs, seed, threads);
    } else {
        const NonconvexProblem problem{c.dim, 0.0};
        ParamVector start(c.dim);
        for (std::size_t i = 0; i < c.dim; ++i) start[i] = c.start_value;
        row.schedule = "none";
        row.report = verify_nonconvex(problem, steps, c.cohort, start, c.sigma, runs, seed, threads);
    }
    return row;
}

std::size_t resolve_threads(std::optional<std::size_t> requested) {
    if (requested) return std::max<std::size_t>(*requested, 1);
    if (const char* env = std::getenv("FEDCURR_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError("FEDCURR_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    return 1;
}

namespace {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PreconditionError& e) {
        err << "precondition error: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace

int run_command(const Options& opts, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = ConfigFile::load(opts.config);
        RunConfig cfg = load_run_config(file, opts.config.parent_path());
        if (opts.seed) cfg.experiment.seed = *opts.seed;
        if (opts.out_dir) cfg.out_dir = *opts.out_dir;
        const std::size_t threads = resolve_threads(opts.threads);
        const RunOutput out = execute_run(cfg, threads);
        write_file(cfg.out_dir / "metrics.csv", out.metrics_csv);
        write_file(cfg.out_dir / "summary.csv", out.summary_csv);
        for (const auto& s : out.summary)
            log << s.arm << ": final accuracy " << format_real(s.mean) << " +/- " << format_real(s.stddev) << " over "
                << s.trials << " trial(s)\n";
        log << "wrote " << (cfg.out_dir / "metrics.csv").string() << " and " << (cfg.out_dir / "summary.csv").string()
            << '\n';
        return kExitOk;
    });
}

int verify_command(const Options& opts, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = ConfigFile::load(opts.config);
        VerifyConfig cfg = load_verify_config(file, opts.config.parent_path());
        if (opts.seed) cfg.seed = *opts.seed;
        if (opts.out_dir) cfg.out_dir = *opts.out_dir;
        const std::size_t threads = resolve_threads(opts.threads);

        std::ostringstream report;
        report << theory::kReportHeader << '\n';
        bool all_pass = true;
        for (const auto& c : cfg.cases) {
            theory::ReportRow row;
            try {
                row = run_verify_case(c, cfg.runs, cfg.seed, threads);
            } catch (const PreconditionError& e) {
                throw PreconditionError("case '" + c.id + "': " + e.what());
            } catch (const ConfigError& e) {
                const int line = file.line_of("case." + c.id, "");
                throw ConfigError(file.located(line, "case '" + c.id + "': " + e.what()), line);
            }
            theory::write_report_row(report, row);
            all_pass = all_pass && row.report.pass;
            log << c.id << ": empirical " << format_real(row.report.empirical) << " bound "
                << format_real(row.report.bound) << (row.report.pass ? " pass" : " FAIL") << '\n';
        }
        write_file(cfg.out_dir / "verify_report.csv", report.str());
        log << cfg.cases.size() << " case(s), report at " << (cfg.out_dir / "verify_report.csv").string() << '\n';
        return all_pass ? kExitOk : kExitVerifyFailed;
    });
}

}  // namespace fedcurr::cli
