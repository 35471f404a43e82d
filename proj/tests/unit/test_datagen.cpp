#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "fedcurr/datagen.hpp"
#include "fedcurr/error.hpp"
#include "fedcurr/federation.hpp"

using namespace fedcurr;

namespace {

// Checks the partition invariants directly from the assignment.
void expect_valid(const Partition& p, const Dataset& ds) {
    std::vector<int> seen(ds.size(), 0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < p.num_clients(); ++i) {
        EXPECT_TRUE(std::is_sorted(p.assignment[i].begin(), p.assignment[i].end()));
        std::vector<std::size_t> counts(ds.num_classes, 0);
        for (std::size_t idx : p.assignment[i]) {
            ASSERT_LT(idx, ds.size());
            ++seen[idx];
            ++counts[static_cast<std::size_t>(ds.samples.labels[idx])];
        }
        EXPECT_EQ(counts, p.class_counts[i]);
        wsum += p.weights[i];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_NEAR(wsum, 1.0, 1e-12);
}

// One-class dataset whose expert losses are given explicitly.
Dataset single_class(std::size_t n) {
    Dataset ds;
    ds.num_classes = 1;
    ds.samples.dim = 1;
    ds.samples.features.assign(n, 0.0);
    ds.samples.labels.assign(n, 0);
    ds.difficulty_noise.assign(n, 0.0);
    return ds;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(GenSynthetic, ZeroNoiseGivesClassMeans) {
    const Dataset ds = gen_synthetic(12, 3, 4, 0.0, 0.0, 1);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto y = static_cast<std::size_t>(ds.samples.labels[i]);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(ds.samples.row(i)[k], k == y ? 1.0 : 0.0);
    }
}

TEST(GenSynthetic, SameSeedIsBitwiseIdentical) {
    const Dataset a = gen_synthetic(200, 5, 3, 0.1, 2.0, 42);
    const Dataset b = gen_synthetic(200, 5, 3, 0.1, 2.0, 42);
    EXPECT_EQ(a.samples.features, b.samples.features);
    EXPECT_EQ(a.difficulty_noise, b.difficulty_noise);
    const Dataset c = gen_synthetic(200, 5, 3, 0.1, 2.0, 43);
    EXPECT_NE(a.samples.features, c.samples.features);
}

TEST(GenSynthetic, LabelsBalancedAndNoiseInRange) {
    const Dataset ds = gen_synthetic(100, 4, 6, 0.1, 2.0, 3);
    std::vector<int> counts(4, 0);
    for (int y : ds.samples.labels) ++counts[static_cast<std::size_t>(y)];
    EXPECT_EQ(counts, (std::vector<int>{25, 25, 25, 25}));
    for (double e : ds.difficulty_noise) {
        EXPECT_GE(e, 0.1);
        EXPECT_LE(e, 2.0);
    }
}

TEST(GenSynthetic, InvalidRangesAreConfigErrors) {
    EXPECT_THROW(gen_synthetic(10, 3, 2, 1.0, 0.5, 1), ConfigError);
    EXPECT_THROW(gen_synthetic(2, 3, 2, 0.1, 0.5, 1), ConfigError);
    EXPECT_THROW(gen_synthetic(10, 0, 2, 0.1, 0.5, 1), ConfigError);
}

TEST(GenSynthetic, LossOfTrainedModelGrowsWithNoiseInExpectation) {
    // Noise is isotropic, so large-noise samples sit at both loss extremes and rank
    // correlation is near zero; the mean loss per noise band still increases.
    const Dataset ds = gen_synthetic(8000, 2, 2, 0.1, 2.0, 202207);
    const ModelSpec spec{ModelKind::SoftmaxRegression, 2, 2, 0};
    SgdHyper h;
    h.eta0 = 0.05;
    const ParamVector p = train_centralized(spec, ds.samples, h, 20, 1);
    const auto losses = per_sample_losses(spec, p, ds.samples);
    std::vector<double> sum(4, 0.0), count(4, 0.0);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const auto band = std::min<std::size_t>(3, static_cast<std::size_t>((ds.difficulty_noise[i] - 0.1) / 0.475));
        sum[band] += losses[i];
        count[band] += 1.0;
    }
    for (std::size_t b = 1; b < 4; ++b) EXPECT_GT(sum[b] / count[b], sum[b - 1] / count[b - 1]) << "band " << b;
    EXPECT_GT(pearson(losses, ds.difficulty_noise), 0.1);
}

TEST(Partition, IidSingleClientHoldsEverything) {
    const Dataset ds = gen_synthetic(50, 2, 2, 0.1, 1.0, 1);
    const Partition p = partition(ds, {PartitionScheme::IID, 1, 0.5, 2, 0.0, 9});
    ASSERT_EQ(p.num_clients(), 1u);
    std::vector<std::size_t> all(50);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(p.assignment[0], all);
}

TEST(Partition, InvariantsHoldForEverySchemeAndSeed) {
    const Dataset ds = gen_synthetic(1000, 10, 12, 0.1, 2.0, 5);
    std::vector<PartitionSpec> specs = {
        {PartitionScheme::IID, 20, 0.5, 2, 0.0, 0},
        {PartitionScheme::Dirichlet, 20, 0.05, 2, 0.0, 0},
        {PartitionScheme::Dirichlet, 20, 0.2, 2, 0.0, 0},
        {PartitionScheme::Dirichlet, 20, 0.9, 2, 0.0, 0},
        {PartitionScheme::LabelSkew, 20, 0.5, 2, 0.0, 0},
    };
    for (auto spec : specs) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            spec.seed = seed;
            const Partition p = partition(ds, spec);
            ASSERT_EQ(p.num_clients(), 20u);
            expect_valid(p, ds);
            EXPECT_NO_THROW(validate_partition(p, ds));
        }
    }
}

TEST(Partition, DirichletLargeBetaIsNearUniform) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset ds = gen_synthetic(1000, 10, 10, 0.1, 1.0, seed);
        const Partition p = partition(ds, {PartitionScheme::Dirichlet, 10, 1e6, 2, 0.0, seed});
        for (const auto& row : p.class_counts)
            for (std::size_t c : row) EXPECT_NEAR(static_cast<double>(c), 10.0, 2.0);
    }
}

TEST(Partition, DirichletLeavesNoClientEmpty) {
    const Dataset ds = gen_synthetic(200, 2, 3, 0.1, 1.0, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Partition p = partition(ds, {PartitionScheme::Dirichlet, 30, 0.01, 2, 0.0, seed});
        for (const auto& a : p.assignment) EXPECT_FALSE(a.empty());
        expect_valid(p, ds);
    }
}

TEST(Partition, LabelSkewTwoOfTenClasses) {
    const Dataset ds = gen_synthetic(2000, 10, 10, 0.1, 1.0, 2);
    const Partition p = partition(ds, {PartitionScheme::LabelSkew, 100, 0.5, 2, 0.0, 4});
    for (const auto& row : p.class_counts)
        EXPECT_EQ(std::count_if(row.begin(), row.end(), [](std::size_t c) { return c > 0; }), 2);
    expect_valid(p, ds);
}

TEST(Partition, LabelSkewInfeasibleIsConfigError) {
    const Dataset ds = gen_synthetic(100, 10, 4, 0.1, 1.0, 2);
    EXPECT_THROW(partition(ds, {PartitionScheme::LabelSkew, 4, 0.5, 2, 0.0, 1}), ConfigError);
    EXPECT_THROW(partition(ds, {PartitionScheme::Dirichlet, 4, 0.0, 2, 0.0, 1}), ConfigError);
}

TEST(PartitionDifficulty, FullOrderSplitsByRank) {
    const Dataset ds = single_class(4);
    // Index order deliberately differs from loss order.
    const std::vector<double> losses{0.3, 0.1, 0.4, 0.2};
    const Partition base = make_partition({{0, 1}, {2, 3}}, ds.samples.labels, 1);
    const Partition p = partition_difficulty(ds, base, 1.0, losses, 7);
    EXPECT_EQ(p.assignment[0], (std::vector<std::size_t>{1, 3}));  // losses .1, .2
    EXPECT_EQ(p.assignment[1], (std::vector<std::size_t>{0, 2}));  // losses .3, .4
}

TEST(PartitionDifficulty, HalfOrderTakesRankAtEachOffset) {
    const Dataset ds = single_class(4);
    const std::vector<double> losses{0.1, 0.2, 0.3, 0.4};
    const Partition base = make_partition({{0, 1}, {2, 3}}, ds.samples.labels, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Partition p = partition_difficulty(ds, base, 0.5, losses, seed);
        // floor(0.5 * 2) = 1 element per client, taken at offsets 0 and 2 of the ranking.
        EXPECT_TRUE(std::count(p.assignment[0].begin(), p.assignment[0].end(), 0u) == 1);
        EXPECT_TRUE(std::count(p.assignment[1].begin(), p.assignment[1].end(), 2u) == 1);
        expect_valid(p, ds);
    }
}

TEST(PartitionDifficulty, ZeroOrderIsSeededRandomDeal) {
    const Dataset ds = gen_synthetic(300, 3, 2, 0.1, 2.0, 1);
    const Partition base = partition(ds, {PartitionScheme::Dirichlet, 6, 0.5, 2, 0.0, 3});
    const std::vector<double> losses(ds.difficulty_noise.begin(), ds.difficulty_noise.end());
    const Partition a = partition_difficulty(ds, base, 0.0, losses, 11);
    const Partition b = partition_difficulty(ds, base, 0.0, losses, 11);
    const Partition c = partition_difficulty(ds, base, 0.0, losses, 12);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_NE(a.assignment, c.assignment);
    EXPECT_EQ(a.class_counts, base.class_counts);
}

TEST(PartitionDifficulty, PreservesClassCountsAndSortsSingleClass) {
    const Dataset multi = gen_synthetic(600, 4, 3, 0.1, 2.0, 8);
    const std::vector<double> losses(multi.difficulty_noise.begin(), multi.difficulty_noise.end());
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const Partition base = partition(multi, {PartitionScheme::Dirichlet, 10, 0.2, 2, 0.0, 5});
        const Partition p = partition_difficulty(multi, base, f, losses, 5);
        EXPECT_EQ(p.class_counts, base.class_counts);
        expect_valid(p, multi);
    }

    Dataset one = single_class(97);
    std::vector<double> l1(97);
    for (std::size_t i = 0; i < l1.size(); ++i) l1[i] = std::sin(static_cast<double>(i) * 12.9898) * 43758.5453;
    const Partition base = partition(one, {PartitionScheme::IID, 7, 0.5, 2, 0.0, 1});
    const Partition p = partition_difficulty(one, base, 1.0, l1, 1);
    std::vector<double> concat;
    for (const auto& a : p.assignment) {
        std::vector<double> part;
        for (std::size_t i : a) part.push_back(l1[i]);
        std::sort(part.begin(), part.end());  // assignment lists are index-sorted
        concat.insert(concat.end(), part.begin(), part.end());
    }
    EXPECT_TRUE(std::is_sorted(concat.begin(), concat.end()));
}

TEST(PartitionDifficulty, InconsistentBaseIsConfigError) {
    const Dataset ds = single_class(4);
    Partition base = make_partition({{0, 1}, {1, 3}}, ds.samples.labels, 1);
    EXPECT_THROW(partition_difficulty(ds, base, 0.5, std::vector<double>{1, 2, 3, 4}, 1), ConfigError);
    base = make_partition({{0, 1}, {2, 3}}, ds.samples.labels, 1);
    EXPECT_THROW(partition_difficulty(ds, base, 0.5, std::vector<double>{1, 2, 3}, 1), ConfigError);
}

TEST(PartitionScoreStd, KnownValues) {
    const Dataset ds = single_class(4);
    const Partition p = make_partition({{0, 1}, {2, 3}}, ds.samples.labels, 1);
    EXPECT_EQ(partition_score_std(p, std::vector<double>{0.0, 2.0, 5.0, 5.0}), (std::vector<double>{1.0, 0.0}));
    const Partition empty = make_partition({{0, 1, 2, 3}, {}}, ds.samples.labels, 1);
    EXPECT_THROW(partition_score_std(empty, std::vector<double>{1, 2, 3, 4}), PreconditionError);
}

TEST(PartitionScoreStd, OrderedPartitionsAreMoreConsistent) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset ds = gen_synthetic(1000, 2, 10, 0.1, 2.0, seed);
        const std::vector<double> losses(ds.difficulty_noise.begin(), ds.difficulty_noise.end());
        const Partition base = partition(ds, {PartitionScheme::Dirichlet, 20, 0.2, 2, 0.0, seed});
        auto mean_std = [&](double f) {
            const auto s = partition_score_std(partition_difficulty(ds, base, f, losses, seed), losses);
            return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
        };
        EXPECT_LT(mean_std(1.0), mean_std(0.0));
    }
}

TEST(Serialization, DatasetAndPartitionRoundTrip) {
    const Dataset ds = gen_synthetic(40, 3, 2, 0.1, 2.0, 4);
    std::stringstream s;
    write_dataset(s, ds);
    const Dataset back = read_dataset(s);
    EXPECT_EQ(back.samples.features, ds.samples.features);
    EXPECT_EQ(back.samples.labels, ds.samples.labels);
    EXPECT_EQ(back.difficulty_noise, ds.difficulty_noise);
    EXPECT_EQ(back.num_classes, 3u);

    const Partition p = partition(ds, {PartitionScheme::Dirichlet, 5, 0.3, 2, 0.0, 2});
    std::stringstream ps;
    write_partition(ps, p);
    const Partition pb = read_partition(ps, ds);
    EXPECT_EQ(pb.assignment, p.assignment);
    EXPECT_EQ(pb.weights, p.weights);
}

TEST(Serialization, MalformedInputIsConfigError) {
    std::stringstream bad("fedcurr-dataset 1\n2 2 2\n0 0.1 1.0\n");
    EXPECT_THROW(read_dataset(bad), ConfigError);
    std::stringstream wrong_magic("not-a-dataset\n");
    EXPECT_THROW(read_dataset(wrong_magic), ConfigError);
}
