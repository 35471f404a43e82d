#include "fedcurr/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "fedcurr/error.hpp"
#include "fedcurr/format.hpp"

namespace fedcurr {

bool is_loss_based(ScoringMethod method) noexcept {
    return method == ScoringMethod::GLoss || method == ScoringMethod::LLoss || method == ScoringMethod::LGLoss ||
           method == ScoringMethod::Expert;
}

ScoreTable scores_from_losses(const std::vector<double>& losses, std::size_t round) {
    ScoreTable t;
    t.round = round;
    t.raw.resize(losses.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        t.raw[i] = 1.0 / std::max(losses[i], kZeroLossGuard);
        sum += t.raw[i];
    }
    t.scores.resize(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) t.scores[i] = t.raw[i] / sum;
    return t;
}

namespace {

const ParamVector& require(const ParamVector* p, const char* which) {
    if (p == nullptr) throw ConfigError(std::string("scoring method needs the ") + which + " model");
    return *p;
}

ScoreTable flags_table(std::vector<double> flags, std::size_t round) {
    ScoreTable t;
    t.round = round;
    t.scores = flags;
    t.raw = std::move(flags);
    return t;
}

}  // namespace

ScoreTable score_samples(ScoringMethod method, const ScoringModels& models, const ModelSpec& spec,
                         const SampleBatch& batch, Rng& rng, std::size_t round) {
    if (batch.empty()) throw ConfigError("cannot score an empty batch");
    switch (method) {
        case ScoringMethod::GLoss:
            return scores_from_losses(per_sample_losses(spec, require(models.global, "global"), batch), round);
        case ScoringMethod::LLoss:
            return scores_from_losses(per_sample_losses(spec, require(models.local, "local"), batch), round);
        case ScoringMethod::Expert:
            return scores_from_losses(per_sample_losses(spec, require(models.expert, "expert"), batch), round);
        case ScoringMethod::LGLoss: {
            auto g = per_sample_losses(spec, require(models.global, "global"), batch);
            const auto l = per_sample_losses(spec, require(models.local, "local"), batch);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.5 * (g[i] + l[i]);
            return scores_from_losses(g, round);
        }
        case ScoringMethod::GPred:
        case ScoringMethod::LPred: {
            const auto& p = method == ScoringMethod::GPred ? require(models.global, "global")
                                                           : require(models.local, "local");
            const auto pred = predict(spec, p, batch);
            std::vector<double> flags(pred.size());
            for (std::size_t i = 0; i < pred.size(); ++i) flags[i] = pred[i] == batch.labels[i] ? 1.0 : 0.0;
            return flags_table(std::move(flags), round);
        }
        case ScoringMethod::LGPred: {
            const auto pg = predict(spec, require(models.global, "global"), batch);
            const auto pl = predict(spec, require(models.local, "local"), batch);
            std::vector<double> flags(pg.size());
            for (std::size_t i = 0; i < pg.size(); ++i) flags[i] = pg[i] == pl[i] ? 1.0 : 0.0;
            return flags_table(std::move(flags), round);
        }
        case ScoringMethod::Random: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<double> keys(batch.size());
            for (double& k : keys) k = u(rng);
            return flags_table(std::move(keys), round);
        }
    }
    throw ConfigError("unknown scoring method");
}

void PacingSpec::validate() const {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("pacing a must be in (0, 1]");
    if (!(b > 0.0 && b <= 1.0)) throw ConfigError("pacing b must be in (0, 1]");
    if (total < 1) throw ConfigError("pacing needs a nonempty set");
}

std::size_t pace(const PacingSpec& spec, std::size_t t) {
    spec.validate();
    if (t > spec.budget)
        throw PreconditionError("pacing step " + std::to_string(t) + " outside [0, " + std::to_string(spec.budget) + "]");
    const double n = static_cast<double>(spec.total);
    const double horizon = spec.a * static_cast<double>(spec.budget);
    const double td = static_cast<double>(t);
    const auto lo = std::max<long long>(1, std::llround(n * spec.b));
    const auto hi = static_cast<long long>(spec.total);
    if (td >= horizon) return spec.total;

    const double start = n * spec.b;
    const double grow = n * (1.0 - spec.b);
    double g = start;
    switch (spec.family) {
        case PacingFamily::Exponential:
            g = start + grow * (std::exp(10.0 * td / horizon) - 1.0) / (std::exp(10.0) - 1.0);
            break;
        case PacingFamily::Step: g = start + n * std::floor(td / horizon); break;
        case PacingFamily::Sqrt: g = start + grow * std::sqrt(td) / std::sqrt(horizon); break;
        case PacingFamily::Linear: g = start + grow * td / horizon; break;
        case PacingFamily::Quadratic: g = start + grow * td * td / (horizon * horizon); break;
    }
    return static_cast<std::size_t>(std::clamp(std::llround(g), std::min(lo, hi), hi));
}

std::vector<std::size_t> order_and_select(const ScoreTable& table, Ordering ordering, std::size_t count, Rng& rng) {
    const std::size_t n = table.size();
    if (count < 1 || count > n)
        throw PreconditionError("selection count " + std::to_string(count) + " outside [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const auto& s = table.scores;
    switch (ordering) {
        case Ordering::Curriculum:
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });
            break;
        case Ordering::Anti:
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return s[x] < s[y]; });
            break;
        case Ordering::Random: std::shuffle(idx.begin(), idx.end(), rng); break;
    }
    idx.resize(count);
    return idx;
}

void write_score_table_csv(std::ostream& os, const ScoreTable& table) {
    os << "index,raw,score\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        os << i << ',' << format_real(table.raw[i]) << ',' << format_real(table.scores[i]) << '\n';
}

std::string_view to_string(ScoringMethod m) noexcept {
    switch (m) {
        case ScoringMethod::GLoss: return "g_loss";
        case ScoringMethod::LLoss: return "l_loss";
        case ScoringMethod::LGLoss: return "lg_loss";
        case ScoringMethod::GPred: return "g_pred";
        case ScoringMethod::LPred: return "l_pred";
        case ScoringMethod::LGPred: return "lg_pred";
        case ScoringMethod::Expert: return "expert";
        case ScoringMethod::Random: return "random";
    }
    return "?";
}

std::string_view to_string(PacingFamily f) noexcept {
    switch (f) {
        case PacingFamily::Exponential: return "exponential";
        case PacingFamily::Step: return "step";
        case PacingFamily::Linear: return "linear";
        case PacingFamily::Quadratic: return "quadratic";
        case PacingFamily::Sqrt: return "sqrt";
    }
    return "?";
}

std::string_view to_string(Ordering o) noexcept {
    switch (o) {
        case Ordering::Curriculum: return "curriculum";
        case Ordering::Anti: return "anti";
        case Ordering::Random: return "random";
    }
    return "?";
}

ScoringMethod parse_scoring_method(std::string_view s) {
    for (auto m : {ScoringMethod::GLoss, ScoringMethod::LLoss, ScoringMethod::LGLoss, ScoringMethod::GPred,
                   ScoringMethod::LPred, ScoringMethod::LGPred, ScoringMethod::Expert, ScoringMethod::Random})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown scoring method '" + std::string(s) + "'");
}

PacingFamily parse_pacing_family(std::string_view s) {
    for (auto f : {PacingFamily::Exponential, PacingFamily::Step, PacingFamily::Linear, PacingFamily::Quadratic,
                   PacingFamily::Sqrt})
        if (to_string(f) == s) return f;
    throw ConfigError("unknown pacing family '" + std::string(s) + "'");
}

Ordering parse_ordering(std::string_view s) {
    for (auto o : {Ordering::Curriculum, Ordering::Anti, Ordering::Random})
        if (to_string(o) == s) return o;
    throw ConfigError("unknown ordering '" + std::string(s) + "'");
}

}  // namespace fedcurr
