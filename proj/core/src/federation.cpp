#include "fedcurr/federation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "fedcurr/error.hpp"
#include "fedcurr/format.hpp"
#include "fedcurr/parallel.hpp"

namespace fedcurr {

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::FedAvg: return "fedavg";
        case Algorithm::FedProx: return "fedprox";
        case Algorithm::Scaffold: return "scaffold";
        case Algorithm::FedNova: return "fednova";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::FedAvg, Algorithm::FedProx, Algorithm::Scaffold, Algorithm::FedNova})
        if (to_string(a) == s) return a;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
    model.validate();
    hyper.validate();
    if (num_clients < 1) throw ConfigError("num_clients must be at least 1");
    if (local_epochs < 1) throw ConfigError("local_epochs must be at least 1");
    if (!client_curriculum && (participation < 1 || participation > num_clients))
        throw ConfigError("participation must be in [1, num_clients]");
    if (!(prox_mu >= 0.0)) throw ConfigError("prox_mu must be nonnegative");
    if (data_curriculum) {
        PacingSpec{data_curriculum->family, data_curriculum->a, data_curriculum->b, 1, rounds}.validate();
        if (data_curriculum->scoring == ScoringMethod::Expert && !expert_params)
            throw ConfigError("expert scoring requires an expert model");
        if (!is_loss_based(data_curriculum->scoring) && data_curriculum->scoring != ScoringMethod::Random &&
            !model.is_classifier())
            throw ConfigError("prediction-based scoring requires a classifier");
    }
    if (client_curriculum) client_selection().validate(num_clients);
    if (expert_params && expert_params->size() != model.param_count())
        throw ConfigError("expert model does not match the model architecture");
}

ClientSelectionConfig ExperimentConfig::client_selection() const {
    if (!client_curriculum) throw ConfigError("client curriculum is not configured");
    const auto& cc = *client_curriculum;
    return {PacingSpec{cc.family, cc.a, cc.b, num_clients, rounds}, cc.ordering, cc.client_batch_size};
}

namespace {

std::vector<std::size_t> choose_subset(ClientState& state, const ParamVector& global_params,
                                       const ExperimentConfig& cfg, std::size_t round) {
    const std::size_t n = state.data.size();
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    if (!cfg.data_curriculum) return rows;

    const auto& dc = *cfg.data_curriculum;
    Rng rng = make_rng(cfg.seed, Stream::Scoring, {round, state.client_id});
    ScoringModels models;
    models.global = &global_params;
    models.local = state.local_params.empty() ? &global_params : &state.local_params;
    models.expert = cfg.expert_params ? &*cfg.expert_params : nullptr;
    const auto table = score_samples(dc.scoring, models, cfg.model, state.data, rng, round);
    if (cfg.on_scores) cfg.on_scores(round, state.client_id, table);

    const std::size_t count = pace(PacingSpec{dc.family, dc.a, dc.b, n, cfg.rounds}, round);
    auto chosen = order_and_select(table, dc.ordering, count, rng);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace

ClientUpdate client_update(ClientState& state, const ParamVector& global_params, const ServerState& server,
                           const ExperimentConfig& cfg, std::size_t round) {
    if (state.data.empty()) throw PreconditionError("client " + std::to_string(state.client_id) + " holds no samples");
    const std::size_t p = global_params.size();
    const bool scaffold = cfg.algorithm == Algorithm::Scaffold;
    const bool prox = cfg.algorithm == Algorithm::FedProx && cfg.prox_mu != 0.0;
    if (scaffold) {
        if (state.control.empty()) state.control = ParamVector(p);
        if (server.control.size() != p) throw ConfigError("server control variate has the wrong length");
    }

    const auto subset = choose_subset(state, global_params, cfg, round);
    if (subset.empty()) throw PreconditionError("selected subset is empty");

    ParamVector theta = global_params;
    state.momentum = ParamVector(p);
    ParamVector correction;
    if (scaffold) correction = vec::sub(server.control, state.control);

    Rng rng = make_rng(cfg.seed, Stream::Training, {round, state.client_id});
    std::vector<std::size_t> order = subset;
    const std::size_t bs = cfg.hyper.batch_size;
    std::size_t step = 0;
    double lr_sum = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t len = std::min(bs, order.size() - start);
            ParamVector g = grad(cfg.model, theta, state.data, std::span(order).subspan(start, len));
            if (prox)
                for (std::size_t i = 0; i < p; ++i) g[i] += cfg.prox_mu * (theta[i] - global_params[i]);
            if (scaffold) vec::axpy(1.0, correction, g);
            lr_sum += cfg.hyper.learning_rate(step);
            sgd_step_inplace(theta, g, cfg.hyper, step, state.momentum);
            ++step;
        }
    }

    ClientUpdate up;
    up.client_id = state.client_id;
    up.weight = static_cast<double>(state.data.size());
    up.steps = step;
    up.subset_fraction = static_cast<double>(subset.size()) / static_cast<double>(state.data.size());
    if (scaffold) {
        // c_k <- c_k - c + (theta_g - theta_k) / (tau_k * mean step size)
        ParamVector next = state.control;
        if (lr_sum > 0.0)
            for (std::size_t i = 0; i < p; ++i)
                next[i] = state.control[i] - server.control[i] + (global_params[i] - theta[i]) / lr_sum;
        up.control_delta = vec::sub(next, state.control);
        state.control = std::move(next);
    }
    state.last_steps = step;
    state.local_params = theta;
    up.params = std::move(theta);
    return up;
}

ParamVector aggregate(std::span<const ClientUpdate> updates, Algorithm algorithm, const ParamVector& global_params,
                      ServerState& server, std::size_t num_clients) {
    if (updates.empty()) throw PreconditionError("aggregate called with no client updates");
    std::vector<const ClientUpdate*> ups;
    ups.reserve(updates.size());
    for (const auto& u : updates) ups.push_back(&u);
    std::sort(ups.begin(), ups.end(), [](auto* x, auto* y) { return x->client_id < y->client_id; });

    const std::size_t p = global_params.size();
    double total = 0.0;
    for (auto* u : ups) {
        if (u->params.size() != p) throw ConfigError("client update has the wrong parameter length");
        total += u->weight;
    }
    if (!(total > 0.0)) throw PreconditionError("aggregation weights sum to zero");
    std::vector<double> w(ups.size());
    for (std::size_t k = 0; k < ups.size(); ++k) w[k] = ups[k]->weight / total;

    auto weighted_mean = [&] {
        ParamVector out(p);
        for (std::size_t k = 0; k < ups.size(); ++k) vec::axpy(w[k], ups[k]->params, out);
        return out;
    };

    ParamVector next;
    const bool equal_steps = std::all_of(ups.begin(), ups.end(), [&](auto* u) { return u->steps == ups[0]->steps; });
    if (algorithm == Algorithm::FedNova && !equal_steps) {
        // theta_g - tau_eff * sum_k w_k (theta_g - theta_k) / tau_k
        double tau_eff = 0.0;
        for (std::size_t k = 0; k < ups.size(); ++k) {
            if (ups[k]->steps == 0) throw PreconditionError("FedNova needs at least one local step per client");
            tau_eff += w[k] * static_cast<double>(ups[k]->steps);
        }
        next = global_params;
        for (std::size_t k = 0; k < ups.size(); ++k) {
            const double scale = tau_eff / static_cast<double>(ups[k]->steps);
            for (std::size_t i = 0; i < p; ++i) next[i] -= w[k] * scale * (global_params[i] - ups[k]->params[i]);
        }
    } else {
        // With equal step counts the normalized FedNova step equals the weighted mean.
        next = weighted_mean();
    }

    if (algorithm == Algorithm::Scaffold) {
        if (server.control.size() != p) server.control = ParamVector(p);
        const double frac = static_cast<double>(ups.size()) / static_cast<double>(num_clients);
        for (std::size_t k = 0; k < ups.size(); ++k) {
            if (ups[k]->control_delta.size() != p) throw ConfigError("SCAFFOLD update lacks a control delta");
            vec::axpy(frac * w[k], ups[k]->control_delta, server.control);
        }
    }
    if (!next.all_finite()) throw PreconditionError("aggregated model is not finite (training diverged)");
    return next;
}

double gradient_dissimilarity(std::span<const ParamVector> grads, std::span<const double> weights) {
    if (grads.empty() || grads.size() != weights.size())
        throw PreconditionError("gradient_dissimilarity needs one weight per gradient");
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(wsum - 1.0) > 1e-9) throw PreconditionError("dissimilarity weights must sum to 1");
    const std::size_t p = grads[0].size();
    ParamVector mean(p);
    double energy = 0.0;
    for (std::size_t m = 0; m < grads.size(); ++m) {
        energy += weights[m] * vec::norm_sq(grads[m]);
        vec::axpy(weights[m], grads[m], mean);
    }
    const double denom = vec::norm_sq(mean);
    if (!(denom > 0.0) || denom <= 1e-30 * energy)
        throw PreconditionError("dissimilarity undefined: aggregate gradient is zero");
    return energy / denom;
}

namespace {

std::vector<std::size_t> random_participants(const ExperimentConfig& cfg, std::size_t round) {
    std::vector<std::size_t> ids(cfg.num_clients);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng = make_rng(cfg.seed, Stream::Selection, {round});
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(cfg.participation);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double dissimilarity_or_nan(const ExperimentConfig& cfg, const ParamVector& global_params,
                            const std::vector<ClientState>& clients, std::span<const std::size_t> ids) {
    std::vector<ParamVector> grads;
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t id : ids) total += static_cast<double>(clients[id].data.size());
    for (std::size_t id : ids) {
        grads.push_back(grad(cfg.model, global_params, clients[id].data));
        w.push_back(static_cast<double>(clients[id].data.size()) / total);
    }
    try {
        return gradient_dissimilarity(grads, w);
    } catch (const PreconditionError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

std::vector<RoundMetrics> run_experiment(const ExperimentConfig& cfg, const Dataset& ds, const Partition& part,
                                         const SampleBatch& test) {
    cfg.validate();
    validate_partition(part, ds);
    if (part.num_clients() != cfg.num_clients) throw ConfigError("partition client count differs from num_clients");
    if (ds.dim() != cfg.model.input_dim) throw ConfigError("dataset dimension differs from model input_dim");

    std::vector<ClientState> clients(cfg.num_clients);
    for (std::size_t k = 0; k < cfg.num_clients; ++k) {
        clients[k].client_id = k;
        clients[k].data = ds.samples.subset(part.assignment[k]);
        if (clients[k].data.empty()) throw PreconditionError("client " + std::to_string(k) + " holds no samples");
    }
    std::vector<SampleBatch> client_data;
    if (cfg.client_curriculum) {
        client_data.reserve(cfg.num_clients);
        for (const auto& c : clients) client_data.push_back(c.data);
    }

    Rng init = make_rng(cfg.seed, Stream::Init);
    ParamVector global = init_params(cfg.model, init);
    ServerState server;
    if (cfg.algorithm == Algorithm::Scaffold) server.control = ParamVector(global.size());

    std::vector<RoundMetrics> rows;
    if (cfg.rounds == 0) {
        std::vector<std::size_t> all(cfg.num_clients);
        std::iota(all.begin(), all.end(), 0);
        RoundMetrics m;
        const auto e = evaluate(cfg.model, global, test);
        m.test_acc = e.accuracy;
        m.test_loss = e.loss;
        double loss = 0.0;
        for (const auto& c : clients) loss += client_loss(cfg.model, global, c.data);
        m.mean_client_loss = loss / static_cast<double>(clients.size());
        m.lambda = dissimilarity_or_nan(cfg, global, clients, all);
        rows.push_back(m);
        return rows;
    }

    for (std::size_t t = 0; t < cfg.rounds; ++t) {
        RoundMetrics m;
        m.round = t + 1;
        double loss_sum = 0.0;
        if (cfg.client_curriculum) {
            const auto scores = score_clients(cfg.model, global, client_data);
            Rng rng = make_rng(cfg.seed, Stream::Selection, {t});
            m.participants = select_clients(scores, cfg.client_selection(), t, rng);
            for (std::size_t id : m.participants) loss_sum += scores[id].mean_loss;
        } else {
            m.participants = random_participants(cfg, t);
            for (std::size_t id : m.participants) loss_sum += client_loss(cfg.model, global, clients[id].data);
        }
        m.mean_client_loss = loss_sum / static_cast<double>(m.participants.size());
        m.lambda = dissimilarity_or_nan(cfg, global, clients, m.participants);

        std::vector<ClientUpdate> updates(m.participants.size());
        parallel_for(updates.size(), cfg.threads, [&](std::size_t i) {
            updates[i] = client_update(clients[m.participants[i]], global, server, cfg, t);
        });
        double frac = 0.0;
        for (const auto& u : updates) frac += u.subset_fraction;
        m.subset_frac = frac / static_cast<double>(updates.size());

        global = aggregate(updates, cfg.algorithm, global, server, cfg.num_clients);
        const auto e = evaluate(cfg.model, global, test);
        m.test_acc = e.accuracy;
        m.test_loss = e.loss;
        rows.push_back(std::move(m));
    }
    return rows;
}

ParamVector train_centralized(const ModelSpec& spec, const SampleBatch& data, const SgdHyper& hyper,
                              std::size_t epochs, std::uint64_t seed) {
    hyper.validate();
    Rng init = make_rng(seed, Stream::Init);
    ParamVector theta = init_params(spec, init);
    ParamVector momentum(theta.size());
    Rng rng = make_rng(seed, Stream::Training);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t step = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t len = std::min(hyper.batch_size, order.size() - start);
            const auto g = grad(spec, theta, data, std::span(order).subspan(start, len));
            sgd_step_inplace(theta, g, hyper, step++, momentum);
        }
    }
    return theta;
}

RunLabels run_labels(const ExperimentConfig& cfg) {
    RunLabels l;
    l.algorithm = std::string(to_string(cfg.algorithm));
    l.seed = cfg.seed;
    if (cfg.data_curriculum) {
        const auto& dc = *cfg.data_curriculum;
        l.ordering = std::string(to_string(dc.ordering));
        l.scoring = std::string(to_string(dc.scoring));
        l.pacing_family = std::string(to_string(dc.family));
        l.pacing_a = dc.a;
        l.pacing_b = dc.b;
    } else {
        l.ordering = "vanilla";
        l.scoring = "none";
        l.pacing_family = "none";
    }
    if (cfg.client_curriculum) l.ordering += "/client_" + std::string(to_string(cfg.client_curriculum->ordering));
    return l;
}

void write_metrics_rows(std::ostream& os, const RunLabels& labels, std::span<const RoundMetrics> rows) {
    for (const auto& r : rows) {
        os << r.round << ',' << labels.algorithm << ',' << labels.ordering << ',' << labels.scoring << ','
           << labels.pacing_family << ',' << format_real(labels.pacing_a) << ',' << format_real(labels.pacing_b) << ','
           << labels.seed << ',' << format_real(r.test_acc) << ',' << format_real(r.test_loss) << ','
           << format_real(r.mean_client_loss) << ',' << format_real(r.lambda) << ',' << format_real(r.subset_frac)
           << '\n';
    }
}

}  // namespace fedcurr
