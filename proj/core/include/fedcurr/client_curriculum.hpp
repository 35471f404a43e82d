#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedcurr/curriculum.hpp"
#include "fedcurr/model.hpp"

namespace fedcurr {

struct ClientScore {
    std::size_t client_id = 0;
    double mean_loss = 0.0;
    double score = 0.0;  // normalized inverse mean loss
};

/// Pacing runs over clients (N = number of clients, T = rounds); at most
/// `client_batch_size` of the eligible clients participate in a round.
struct ClientSelectionConfig {
    PacingSpec pacing;
    Ordering ordering = Ordering::Curriculum;
    std::size_t client_batch_size = 10;

    void validate(std::size_t num_clients) const;
};

/// Mean per-sample loss over the client's data.
double client_loss(const ModelSpec& spec, const ParamVector& params, const SampleBatch& client_data);

std::vector<ClientScore> score_clients(const ModelSpec& spec, const ParamVector& params,
                                       std::span<const SampleBatch> client_data);

/// The K(t) = pace(t) clients first in line: lowest loss first for Curriculum, highest
/// first for Anti, a seeded shuffle for Random. Ties break by ascending client id.
std::vector<std::size_t> eligible_clients(std::span<const ClientScore> scores, const ClientSelectionConfig& cfg,
                                          std::size_t t, Rng& rng);

/// One uniformly drawn batch of min(Q, K(t)) eligible clients, sorted by id.
std::vector<std::size_t> select_clients(std::span<const ClientScore> scores, const ClientSelectionConfig& cfg,
                                        std::size_t t, Rng& rng);

/// A_o = accuracy(o) - accuracy(vanilla).
inline double curriculum_advantage(double acc_ordered, double acc_vanilla) noexcept {
    return acc_ordered - acc_vanilla;
}

}  // namespace fedcurr
