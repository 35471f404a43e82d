#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fedcurr/client_curriculum.hpp"
#include "fedcurr/error.hpp"

using namespace fedcurr;

namespace {

std::vector<ClientScore> scores_for(const std::vector<double>& losses) {
    std::vector<ClientScore> s;
    const auto t = scores_from_losses(losses);
    for (std::size_t k = 0; k < losses.size(); ++k) s.push_back({k, losses[k], t.scores[k]});
    return s;
}

ClientSelectionConfig config(std::size_t m, std::size_t q, Ordering o, double a = 0.8, double b = 0.2,
                             std::size_t rounds = 10) {
    return {PacingSpec{PacingFamily::Linear, a, b, m, rounds}, o, q};
}

}  // namespace

TEST(ClientLoss, MeanOfPerSampleLosses) {
    // Linear model with zero parameters: loss 1/2 y^2.
    const ModelSpec spec{ModelKind::LinearRegression, 1, 1, 0};
    SampleBatch b;
    b.dim = 1;
    b.features = {0.0, 0.0};
    b.labels = {0, 0};
    b.targets = {1.0, std::sqrt(3.0)};  // losses 0.5 and 1.5
    EXPECT_NEAR(client_loss(spec, ParamVector(2), b), 1.0, 1e-15);

    SampleBatch twice = b;
    twice.features.insert(twice.features.end(), b.features.begin(), b.features.end());
    twice.labels.insert(twice.labels.end(), b.labels.begin(), b.labels.end());
    twice.targets.insert(twice.targets.end(), b.targets.begin(), b.targets.end());
    EXPECT_NEAR(client_loss(spec, ParamVector(2), twice), 1.0, 1e-15);

    EXPECT_THROW(client_loss(spec, ParamVector(2), SampleBatch{}), PreconditionError);
}

TEST(ClientScores, ScoreOrderReversesLossOrder) {
    const auto s = scores_for({3.0, 1.0, 2.0});
    EXPECT_GT(s[1].score, s[2].score);
    EXPECT_GT(s[2].score, s[0].score);
}

TEST(EligibleClients, CurriculumTakesLowestLosses) {
    const auto s = scores_for({3.0, 1.0, 2.0});
    // b chosen so that K(0) = round(3 * 2/3) = 2.
    auto cfg = config(3, 2, Ordering::Curriculum, 0.8, 2.0 / 3.0);
    Rng rng = make_rng(1, Stream::Selection);
    const auto e = eligible_clients(s, cfg, 0, rng);
    EXPECT_EQ(std::set<std::size_t>(e.begin(), e.end()), (std::set<std::size_t>{1, 2}));
    cfg.ordering = Ordering::Anti;
    const auto a = eligible_clients(s, cfg, 0, rng);
    EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()), (std::set<std::size_t>{0, 2}));
}

TEST(EligibleClients, InvariantUnderLossRescaling) {
    std::vector<double> losses{0.7, 0.2, 1.9, 0.4, 0.4, 3.3, 0.05, 1.0};
    std::vector<double> scaled;
    for (double l : losses) scaled.push_back(l * 123.0);
    for (auto o : {Ordering::Curriculum, Ordering::Anti}) {
        for (std::size_t t = 0; t <= 10; ++t) {
            Rng r1 = make_rng(1, Stream::Selection);
            Rng r2 = make_rng(1, Stream::Selection);
            const auto cfg = config(8, 3, o);
            EXPECT_EQ(eligible_clients(scores_for(losses), cfg, t, r1), eligible_clients(scores_for(scaled), cfg, t, r2));
        }
    }
}

TEST(SelectClients, BatchIsSortedSubsetOfEligible) {
    std::vector<double> losses;
    for (int k = 0; k < 30; ++k) losses.push_back(1.0 + (k * 7919 % 31) / 10.0);
    const auto s = scores_for(losses);
    for (auto o : {Ordering::Curriculum, Ordering::Anti, Ordering::Random}) {
        const auto cfg = config(30, 4, o);
        for (std::size_t t = 0; t <= 10; ++t) {
            Rng r1 = make_rng(t, Stream::Selection);
            Rng r2 = make_rng(t, Stream::Selection);
            const auto eligible = eligible_clients(s, cfg, t, r1);
            const auto batch = select_clients(s, cfg, t, r2);
            EXPECT_EQ(batch.size(), std::min<std::size_t>(4, eligible.size()));
            EXPECT_TRUE(std::is_sorted(batch.begin(), batch.end()));
            for (std::size_t id : batch) EXPECT_NE(std::find(eligible.begin(), eligible.end(), id), eligible.end());
        }
    }
}

TEST(SelectClients, EligibleSetEqualToBatchIsReturnedWhole) {
    const auto s = scores_for({5.0, 4.0, 3.0, 2.0, 1.0});
    const auto cfg = config(5, 2, Ordering::Curriculum, 0.8, 0.4);  // K(0) = 2 = Q
    Rng rng = make_rng(3, Stream::Selection);
    EXPECT_EQ(select_clients(s, cfg, 0, rng), (std::vector<std::size_t>{3, 4}));
}

TEST(SelectClients, RandomOrderingIsReproducible) {
    const auto s = scores_for({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const auto cfg = config(10, 3, Ordering::Random, 0.5, 0.5);
    Rng a = make_rng(17, Stream::Selection);
    Rng b = make_rng(17, Stream::Selection);
    EXPECT_EQ(select_clients(s, cfg, 2, a), select_clients(s, cfg, 2, b));
}

TEST(SelectClients, InvalidBatchSizeIsConfigError) {
    const auto s = scores_for({1, 2, 3});
    Rng rng = make_rng(1, Stream::Selection);
    EXPECT_THROW(select_clients(s, config(3, 0, Ordering::Curriculum), 0, rng), ConfigError);
    EXPECT_THROW(select_clients(s, config(3, 4, Ordering::Curriculum), 0, rng), ConfigError);
}

TEST(Advantage, Subtraction) {
    EXPECT_NEAR(curriculum_advantage(0.55, 0.52), 0.03, 1e-15);
    EXPECT_EQ(curriculum_advantage(0.4, 0.4), 0.0);
    EXPECT_NEAR(curriculum_advantage(46.34, 39.56), 6.78, 1e-12);
}
