#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedcurr/client_curriculum.hpp"
#include "fedcurr/curriculum.hpp"
#include "fedcurr/datagen.hpp"
#include "fedcurr/model.hpp"

namespace fedcurr {

enum class Algorithm { FedAvg, FedProx, Scaffold, FedNova };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view s);

/// Ordered local training: each round every participating client scores its data,
/// keeps the pace(t) samples chosen by `ordering` and trains on that subset.
struct DataCurriculum {
    ScoringMethod scoring = ScoringMethod::GLoss;
    PacingFamily family = PacingFamily::Linear;
    double a = 0.8;
    double b = 0.2;
    Ordering ordering = Ordering::Curriculum;
};

struct ClientCurriculum {
    PacingFamily family = PacingFamily::Linear;
    double a = 0.8;
    double b = 0.2;
    Ordering ordering = Ordering::Curriculum;
    std::size_t client_batch_size = 10;
};

struct ExperimentConfig {
    ModelSpec model;
    std::size_t num_clients = 100;
    std::size_t participation = 10;  // Q, used when client curriculum is off
    std::size_t rounds = 100;
    std::size_t local_epochs = 10;
    Algorithm algorithm = Algorithm::FedAvg;
    double prox_mu = 0.01;
    std::optional<DataCurriculum> data_curriculum;
    std::optional<ClientCurriculum> client_curriculum;
    SgdHyper hyper;
    std::uint64_t seed = 202207;
    std::size_t threads = 1;
    /// Required by ScoringMethod::Expert.
    std::optional<ParamVector> expert_params;
    /// Called with every score table computed during local training (debug dumps).
    /// Invoked concurrently from worker threads.
    std::function<void(std::size_t round, std::size_t client, const ScoreTable&)> on_scores;

    void validate() const;
    ClientSelectionConfig client_selection() const;
};

struct ClientState {
    std::size_t client_id = 0;
    SampleBatch data;
    ParamVector momentum;
    ParamVector control;       // SCAFFOLD c_k
    ParamVector local_params;  // model after the client's last update; empty before
    std::size_t last_steps = 0;
};

struct ServerState {
    ParamVector control;  // SCAFFOLD c
};

struct ClientUpdate {
    std::size_t client_id = 0;
    ParamVector params;
    double weight = 0.0;  // |D_k|
    std::size_t steps = 0;
    ParamVector control_delta;  // c_k(new) - c_k(old), SCAFFOLD only
    double subset_fraction = 1.0;
};

/// Broadcast, optional data curriculum, E epochs of mini-batch SGD over the chosen
/// subset. Randomness is keyed by (cfg.seed, round, client id). Updates `state`.
ClientUpdate client_update(ClientState& state, const ParamVector& global_params, const ServerState& server,
                           const ExperimentConfig& cfg, std::size_t round);

/// Combines updates in ascending client-id order with weights renormalized over the
/// participants. FedAvg/FedProx: weighted mean. FedNova: normalized-step averaging.
/// SCAFFOLD: weighted mean, and c += (|S| / M) * sum_k w_k (c_k(new) - c_k(old)).
ParamVector aggregate(std::span<const ClientUpdate> updates, Algorithm algorithm, const ParamVector& global_params,
                      ServerState& server, std::size_t num_clients);

/// sum_m q_m |g_m|^2 / |sum_m q_m g_m|^2.
double gradient_dissimilarity(std::span<const ParamVector> grads, std::span<const double> weights);

struct RoundMetrics {
    std::size_t round = 0;  // number of completed aggregation rounds
    double test_acc = 0.0;
    double test_loss = 0.0;
    std::vector<std::size_t> participants;
    double mean_client_loss = 0.0;
    double lambda = 0.0;  // NaN when undefined
    double subset_frac = 1.0;
};

/// T rounds of select, broadcast, client_update, aggregate, evaluate. Emits one row
/// per completed round, or a single row for the initial model when T = 0.
std::vector<RoundMetrics> run_experiment(const ExperimentConfig& cfg, const Dataset& ds, const Partition& part,
                                         const SampleBatch& test);

/// Plain mini-batch SGD on pooled data; used to build the expert model.
ParamVector train_centralized(const ModelSpec& spec, const SampleBatch& data, const SgdHyper& hyper,
                              std::size_t epochs, std::uint64_t seed);

/// Labels for the metrics CSV columns that describe a run.
struct RunLabels {
    std::string algorithm;
    std::string ordering;
    std::string scoring;
    std::string pacing_family;
    double pacing_a = 1.0;
    double pacing_b = 1.0;
    std::uint64_t seed = 0;
};

RunLabels run_labels(const ExperimentConfig& cfg);

inline constexpr const char* kMetricsHeader =
    "round,algorithm,ordering,scoring,pacing_family,pacing_a,pacing_b,seed,test_acc,test_loss,mean_client_loss,"
    "lambda,subset_frac";

void write_metrics_rows(std::ostream& os, const RunLabels& labels, std::span<const RoundMetrics> rows);

}  // namespace fedcurr
