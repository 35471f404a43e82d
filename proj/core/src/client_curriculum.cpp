#include "fedcurr/client_curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedcurr/error.hpp"

namespace fedcurr {

void ClientSelectionConfig::validate(std::size_t num_clients) const {
    pacing.validate();
    if (pacing.total != num_clients) throw ConfigError("client pacing must range over all clients");
    if (client_batch_size < 1 || client_batch_size > num_clients)
        throw ConfigError("client batch size must be in [1, num_clients]");
}

double client_loss(const ModelSpec& spec, const ParamVector& params, const SampleBatch& client_data) {
    if (client_data.empty()) throw PreconditionError("client holds no samples");
    return batch_loss(spec, params, client_data);
}

std::vector<ClientScore> score_clients(const ModelSpec& spec, const ParamVector& params,
                                       std::span<const SampleBatch> client_data) {
    std::vector<ClientScore> out(client_data.size());
    std::vector<double> losses(client_data.size());
    for (std::size_t k = 0; k < client_data.size(); ++k) losses[k] = client_loss(spec, params, client_data[k]);
    const auto table = scores_from_losses(losses);
    for (std::size_t k = 0; k < client_data.size(); ++k) out[k] = {k, losses[k], table.scores[k]};
    return out;
}

std::vector<std::size_t> eligible_clients(std::span<const ClientScore> scores, const ClientSelectionConfig& cfg,
                                          std::size_t t, Rng& rng) {
    cfg.validate(scores.size());
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    // Sort positions by (loss, id) so the result does not depend on input order.
    auto by_id = [&](std::size_t x, std::size_t y) { return scores[x].client_id < scores[y].client_id; };
    std::sort(order.begin(), order.end(), by_id);
    switch (cfg.ordering) {
        case Ordering::Curriculum:
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t x, std::size_t y) { return scores[x].mean_loss < scores[y].mean_loss; });
            break;
        case Ordering::Anti:
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t x, std::size_t y) { return scores[x].mean_loss > scores[y].mean_loss; });
            break;
        case Ordering::Random: std::shuffle(order.begin(), order.end(), rng); break;
    }
    order.resize(pace(cfg.pacing, t));
    std::vector<std::size_t> ids(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) ids[i] = scores[order[i]].client_id;
    return ids;
}

std::vector<std::size_t> select_clients(std::span<const ClientScore> scores, const ClientSelectionConfig& cfg,
                                        std::size_t t, Rng& rng) {
    auto eligible = eligible_clients(scores, cfg, t, rng);
    const std::size_t batch = std::min(cfg.client_batch_size, eligible.size());
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(batch);
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

}  // namespace fedcurr
