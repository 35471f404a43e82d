#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "fedcurr/model.hpp"
#include "fedcurr/param_vector.hpp"
#include "fedcurr/rng.hpp"

namespace fedcurr {

/// Loss-based kinds score r_i = 1 / max(loss_i, eps), s = r / sum(r).
/// Pred kinds give a 0/1 "easy" flag; Random gives i.i.d. uniform keys.
enum class ScoringMethod { GLoss, LLoss, LGLoss, GPred, LPred, LGPred, Expert, Random };

inline constexpr double kZeroLossGuard = 1e-8;

struct ScoreTable {
    std::vector<double> raw;
    std::vector<double> scores;
    std::size_t round = 0;

    std::size_t size() const noexcept { return scores.size(); }
};

struct ScoringModels {
    const ParamVector* global = nullptr;
    const ParamVector* local = nullptr;
    const ParamVector* expert = nullptr;
};

ScoreTable score_samples(ScoringMethod method, const ScoringModels& models, const ModelSpec& spec,
                         const SampleBatch& batch, Rng& rng, std::size_t round = 0);

/// r_i = 1 / max(loss_i, eps), normalized to sum 1.
ScoreTable scores_from_losses(const std::vector<double>& losses, std::size_t round = 0);

bool is_loss_based(ScoringMethod method) noexcept;

enum class PacingFamily { Exponential, Step, Linear, Quadratic, Sqrt };

/// g(t) for a training budget of T steps over a set of N items. `a` is the fraction
/// of the budget after which the full set is used, `b` the initial fraction.
struct PacingSpec {
    PacingFamily family = PacingFamily::Linear;
    double a = 0.8;
    double b = 0.2;
    std::size_t total = 1;   // N
    std::size_t budget = 1;  // T

    void validate() const;
};

/// Subset size at step t in [0, T]: the family formula (with the growth term
/// N(1 - b) for every family), rounded to nearest and clamped to
/// [max(1, round(N b)), N]; N for every t >= aT.
std::size_t pace(const PacingSpec& spec, std::size_t t);

enum class Ordering { Curriculum, Anti, Random };

/// Curriculum: the `count` highest scores; Anti: the `count` lowest; Random: a seeded
/// sample without replacement. Score ties break by ascending index. Returned in
/// selection order.
std::vector<std::size_t> order_and_select(const ScoreTable& scores, Ordering ordering, std::size_t count, Rng& rng);

/// CSV with header `index,raw,score`.
void write_score_table_csv(std::ostream& os, const ScoreTable& table);

std::string_view to_string(ScoringMethod m) noexcept;
std::string_view to_string(PacingFamily f) noexcept;
std::string_view to_string(Ordering o) noexcept;
ScoringMethod parse_scoring_method(std::string_view s);
PacingFamily parse_pacing_family(std::string_view s);
Ordering parse_ordering(std::string_view s);

}  // namespace fedcurr
