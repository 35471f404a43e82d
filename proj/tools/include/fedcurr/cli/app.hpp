#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedcurr/cli/config_file.hpp"
#include "fedcurr/datagen.hpp"
#include "fedcurr/federation.hpp"
#include "fedcurr/theory.hpp"

namespace fedcurr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPrecondition = 3;

/// One column of the comparison: "vanilla" trains on all local data, the other arms
/// use the configured data curriculum with the named ordering.
struct Arm {
    std::string name;
    std::optional<Ordering> ordering;
};

struct RunConfig {
    ExperimentConfig experiment;  // model dims are filled from the dataset per trial
    std::size_t trials = 3;
    std::vector<Arm> arms;
    std::optional<DataCurriculum> curriculum;  // ordering is overridden per arm

    // Synthetic data, or files when `dataset_file` is set.
    std::size_t n = 0;
    std::size_t test_n = 0;
    std::size_t classes = 2;
    std::size_t dim = 0;
    double noise_low = 0.1;
    double noise_high = 2.0;
    std::optional<std::filesystem::path> dataset_file;
    std::optional<std::filesystem::path> test_file;

    PartitionSpec partition;
    std::optional<double> f_ord;
    std::optional<std::filesystem::path> partition_file;

    std::size_t expert_epochs = 20;
    SgdHyper expert_hyper;

    std::filesystem::path out_dir = ".";
    bool dump_scores = false;
    bool save_data = false;

    bool needs_expert() const;
};

/// Relative file paths are resolved against `base_dir`.
RunConfig load_run_config(const ConfigFile& file, const std::filesystem::path& base_dir = {});

struct TrialData {
    Dataset train;
    SampleBatch test;
    Partition partition;
    std::optional<ParamVector> expert;
};

TrialData prepare_trial(const RunConfig& cfg, std::uint64_t trial_seed);
ExperimentConfig arm_config(const RunConfig& cfg, const Arm& arm, const TrialData& data, std::uint64_t trial_seed);

struct ArmSummary {
    std::string arm;
    std::size_t trials = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single trial
};

struct RunOutput {
    std::string metrics_csv;
    std::string summary_csv;
    std::vector<ArmSummary> summary;
};

/// Trials use seeds seed, seed+1, ...; trial x arm jobs run on up to `threads` workers
/// and their rows are concatenated in (trial, arm) order.
RunOutput execute_run(const RunConfig& cfg, std::size_t threads);

struct VerifyCase {
    std::string id;
    bool convex = true;
    std::size_t dim = 8;
    std::size_t rounds = 20;
    std::size_t local_steps = 5;
    std::size_t cohort = 4;
    double alpha = 0.0;
    bool diminishing = false;
    // convex
    double mu = 0.5;
    double lipschitz = 4.0;
    double relative_noise = 0.0;
    double sigma = 0.0;
    theory::BiasKind schedule = theory::BiasKind::ClientBased;
    double b_start = 0.0;
    double b_end = 0.5;
    bool reverse = false;
    double start_distance = 1.0;
    theory::ConvexBoundForm form = theory::ConvexBoundForm::Corrected;
    // nonconvex
    double start_value = 0.5;
};

struct VerifyConfig {
    std::uint64_t seed = 202207;
    std::size_t runs = 500;
    std::vector<VerifyCase> cases;  // file order
    std::filesystem::path out_dir = ".";
};

VerifyConfig load_verify_config(const ConfigFile& file, const std::filesystem::path& base_dir = {});
theory::ReportRow run_verify_case(const VerifyCase& c, std::size_t runs, std::uint64_t seed, std::size_t threads);

struct Options {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
};

/// --threads, else FEDCURR_THREADS, else 1.
std::size_t resolve_threads(std::optional<std::size_t> requested);

/// Both write their CSVs under the output directory and return an exit code; errors
/// are reported on `err` as a single located message.
int run_command(const Options& opts, std::ostream& log, std::ostream& err);
int verify_command(const Options& opts, std::ostream& log, std::ostream& err);

}  // namespace fedcurr::cli
