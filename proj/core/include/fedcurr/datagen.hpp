#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fedcurr/model.hpp"

namespace fedcurr {

struct Dataset {
    SampleBatch samples;
    std::size_t num_classes = 0;
    /// Per-sample noise scale used at generation time. Diagnostic only.
    std::vector<double> difficulty_noise;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t dim() const noexcept { return samples.dim; }
};

/// Gaussian class clusters around unit-norm means with a per-sample noise scale
/// eps ~ U[noise_low, noise_high]: x = mean(y) + eps * u, u ~ N(0, I).
/// Labels are balanced (label = i mod classes). Means are the first `classes`
/// basis vectors when classes <= dim, otherwise fixed random unit vectors that
/// depend only on (classes, dim).
Dataset gen_synthetic(std::size_t n, std::size_t classes, std::size_t dim, double noise_low, double noise_high,
                      std::uint64_t seed);

enum class PartitionScheme { IID, Dirichlet, LabelSkew };

struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::IID;
    std::size_t num_clients = 1;
    double beta = 0.5;         // Dirichlet concentration
    std::size_t classes_per_client = 2;  // LabelSkew k
    double f_ord = 0.0;        // fraction for partition_difficulty
    std::uint64_t seed = 202207;
};

struct Partition {
    std::vector<std::vector<std::size_t>> assignment;       // client -> sorted dataset indices
    std::vector<std::vector<std::size_t>> class_counts;     // client x class
    std::vector<double> weights;                            // |D_m| / sum |D_i|

    std::size_t num_clients() const noexcept { return assignment.size(); }
};

/// Builds counts and weights from an assignment; sorts each index list.
Partition make_partition(std::vector<std::vector<std::size_t>> assignment, std::span<const int> labels,
                         std::size_t num_classes);

/// Throws ConfigError unless the partition is disjoint, exhaustive over [0, n)
/// and its counts/weights agree with the assignment.
void validate_partition(const Partition& part, const Dataset& ds);

/// IID: round-robin over a seeded shuffle.
/// Dirichlet: per-class proportions ~ Dir(beta), largest-remainder quotas, then every
///   empty client receives one sample taken from the largest quota cell.
/// LabelSkew(k): client i holds classes (i*k + j) mod C, j < k; each class pool is
///   split evenly among its holders.
Partition partition(const Dataset& ds, const PartitionSpec& spec);

/// Reshuffles samples among partitions by expert difficulty while keeping every
/// client's per-class counts. Per class, samples are ranked by ascending expert loss;
/// client i takes floor(f_ord * N_ic) samples in rank order starting at its cumulative
/// offset sum_{i' < i} N_i'c, and the rest of the class is dealt at random.
Partition partition_difficulty(const Dataset& ds, const Partition& base, double f_ord,
                               std::span<const double> expert_losses, std::uint64_t seed);

/// Population standard deviation of `scores` within each client.
std::vector<double> partition_score_std(const Partition& part, std::span<const double> scores);

/// Line-oriented text formats:
///   fedcurr-dataset 1
///   <n> <dim> <classes>
///   <label> <noise> <x_0> ... <x_{dim-1}>      (one line per sample)
///
///   fedcurr-partition 1
///   <num_clients> <n>
///   <client>: <index> <index> ...              (one line per client)
void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);
void write_partition(std::ostream& os, const Partition& part);
Partition read_partition(std::istream& is, const Dataset& ds);

}  // namespace fedcurr
