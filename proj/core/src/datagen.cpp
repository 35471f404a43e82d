#include "fedcurr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "fedcurr/error.hpp"
#include "fedcurr/format.hpp"
#include "fedcurr/rng.hpp"

namespace fedcurr {

Dataset gen_synthetic(std::size_t n, std::size_t classes, std::size_t dim, double noise_low, double noise_high,
                      std::uint64_t seed) {
    if (classes == 0 || dim == 0) throw ConfigError("gen_synthetic: classes and dim must be positive");
    if (n < classes) throw ConfigError("gen_synthetic: n must be at least the number of classes");
    if (!(noise_low >= 0.0) || !(noise_low <= noise_high))
        throw ConfigError("gen_synthetic: need 0 <= noise_low <= noise_high");

    Rng rng = make_rng(seed, Stream::Data);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> noise(noise_low, noise_high);

    // Class means depend only on (classes, dim) so that sets drawn with different
    // seeds come from the same generator.
    std::vector<double> means(classes * dim, 0.0);
    if (classes <= dim) {
        for (std::size_t c = 0; c < classes; ++c) means[c * dim + c] = 1.0;
    } else {
        Rng mean_rng = make_rng(0, Stream::Data, {classes, dim});
        for (std::size_t c = 0; c < classes; ++c) {
            double norm = 0.0;
            do {
                norm = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    means[c * dim + k] = normal(mean_rng);
                    norm += means[c * dim + k] * means[c * dim + k];
                }
            } while (norm == 0.0);
            norm = std::sqrt(norm);
            for (std::size_t k = 0; k < dim; ++k) means[c * dim + k] /= norm;
        }
    }

    Dataset ds;
    ds.num_classes = classes;
    ds.samples.dim = dim;
    ds.samples.features.resize(n * dim);
    ds.samples.labels.resize(n);
    ds.difficulty_noise.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = i % classes;
        const double eps = noise_low == noise_high ? noise_low : noise(rng);
        ds.samples.labels[i] = static_cast<int>(y);
        ds.difficulty_noise[i] = eps;
        for (std::size_t k = 0; k < dim; ++k) ds.samples.features[i * dim + k] = means[y * dim + k] + eps * normal(rng);
    }
    return ds;
}

Partition make_partition(std::vector<std::vector<std::size_t>> assignment, std::span<const int> labels,
                         std::size_t num_classes) {
    Partition p;
    p.class_counts.assign(assignment.size(), std::vector<std::size_t>(num_classes, 0));
    std::size_t total = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        std::sort(assignment[i].begin(), assignment[i].end());
        for (std::size_t idx : assignment[i]) {
            if (idx >= labels.size()) throw ConfigError("partition index out of range");
            p.class_counts[i][static_cast<std::size_t>(labels[idx])] += 1;
        }
        total += assignment[i].size();
    }
    p.weights.resize(assignment.size(), 0.0);
    if (total > 0)
        for (std::size_t i = 0; i < assignment.size(); ++i)
            p.weights[i] = static_cast<double>(assignment[i].size()) / static_cast<double>(total);
    p.assignment = std::move(assignment);
    return p;
}

void validate_partition(const Partition& part, const Dataset& ds) {
    const std::size_t n = ds.size();
    if (part.class_counts.size() != part.num_clients() || part.weights.size() != part.num_clients())
        throw ConfigError("partition: counts/weights do not match client count");
    std::vector<char> seen(n, 0);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < part.num_clients(); ++i) {
        std::vector<std::size_t> counts(ds.num_classes, 0);
        for (std::size_t idx : part.assignment[i]) {
            if (idx >= n) throw ConfigError("partition: index out of range");
            if (seen[idx]) throw ConfigError("partition: index " + std::to_string(idx) + " assigned twice");
            seen[idx] = 1;
            ++covered;
            counts[static_cast<std::size_t>(ds.samples.labels[idx])] += 1;
        }
        if (counts != part.class_counts[i])
            throw ConfigError("partition: class counts of client " + std::to_string(i) + " are inconsistent");
    }
    if (covered != n) throw ConfigError("partition does not cover the dataset");
}

namespace {

std::vector<std::vector<std::size_t>> class_pools(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> pools(ds.num_classes);
    for (std::size_t i = 0; i < ds.size(); ++i) pools[static_cast<std::size_t>(ds.samples.labels[i])].push_back(i);
    return pools;
}

// Integer quotas summing to `total` from proportions, by largest remainder
// (ties to the lower index).
std::vector<std::size_t> largest_remainder(const std::vector<double>& props, std::size_t total) {
    const std::size_t m = props.size();
    std::vector<std::size_t> q(m);
    std::vector<double> frac(m);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = props[i] * static_cast<double>(total);
        q[i] = static_cast<std::size_t>(std::floor(exact));
        frac[i] = exact - static_cast<double>(q[i]);
        assigned += q[i];
    }
    // Rounding of the proportions may overshoot by a unit in rare cases.
    while (assigned > total) {
        auto it = std::max_element(q.begin(), q.end());
        --*it;
        --assigned;
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; assigned < total; r = (r + 1) % m, ++assigned) q[order[r]] += 1;
    return q;
}

Partition partition_iid(const Dataset& ds, const PartitionSpec& spec) {
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(spec.seed, Stream::Partition);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<std::size_t>> a(spec.num_clients);
    for (std::size_t p = 0; p < idx.size(); ++p) a[p % spec.num_clients].push_back(idx[p]);
    return make_partition(std::move(a), ds.samples.labels, ds.num_classes);
}

Partition partition_dirichlet(const Dataset& ds, const PartitionSpec& spec) {
    if (!(spec.beta > 0.0)) throw ConfigError("Dirichlet beta must be positive");
    const std::size_t m = spec.num_clients;
    Rng rng = make_rng(spec.seed, Stream::Partition);
    std::gamma_distribution<double> gamma(spec.beta, 1.0);
    auto pools = class_pools(ds);

    // quota[c][i]
    std::vector<std::vector<std::size_t>> quota(ds.num_classes);
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
        std::vector<double> props(m);
        double sum = 0.0;
        for (double& p : props) {
            p = gamma(rng);
            sum += p;
        }
        if (sum > 0.0) {
            for (double& p : props) p /= sum;
        } else {
            // Every draw underflowed: the limit of Dir(beta -> 0) is a single vertex.
            std::fill(props.begin(), props.end(), 0.0);
            props[std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)] = 1.0;
        }
        quota[c] = largest_remainder(props, pools[c].size());
    }

    std::vector<std::size_t> totals(m, 0);
    for (const auto& qc : quota)
        for (std::size_t i = 0; i < m; ++i) totals[i] += qc[i];
    for (std::size_t i = 0; i < m; ++i) {
        if (totals[i] > 0) continue;
        std::size_t best_c = 0, best_j = 0, best = 0;
        for (std::size_t c = 0; c < quota.size(); ++c)
            for (std::size_t j = 0; j < m; ++j)
                if (totals[j] > 1 && quota[c][j] > best) {
                    best = quota[c][j];
                    best_c = c;
                    best_j = j;
                }
        if (best == 0) throw ConfigError("Dirichlet partition cannot give every client a sample");
        quota[best_c][best_j] -= 1;
        totals[best_j] -= 1;
        quota[best_c][i] += 1;
        totals[i] += 1;
    }

    std::vector<std::vector<std::size_t>> a(m);
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
        std::shuffle(pools[c].begin(), pools[c].end(), rng);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < quota[c][i]; ++r) a[i].push_back(pools[c][pos++]);
    }
    return make_partition(std::move(a), ds.samples.labels, ds.num_classes);
}

Partition partition_label_skew(const Dataset& ds, const PartitionSpec& spec) {
    const std::size_t k = spec.classes_per_client;
    const std::size_t classes = ds.num_classes;
    const std::size_t m = spec.num_clients;
    if (k < 1 || k > classes) throw ConfigError("label skew k must be in [1, classes]");
    if (m * k < classes)
        throw ConfigError("label skew infeasible: num_clients * k < number of classes");

    std::vector<std::vector<std::size_t>> holders(classes);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) holders[(i * k + j) % classes].push_back(i);

    Rng rng = make_rng(spec.seed, Stream::Partition);
    auto pools = class_pools(ds);
    std::vector<std::vector<std::size_t>> a(m);
    for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t h = holders[c].size();
        if (pools[c].size() < h)
            throw ConfigError("label skew infeasible: class " + std::to_string(c) + " has fewer samples than holders");
        std::shuffle(pools[c].begin(), pools[c].end(), rng);
        const std::size_t base = pools[c].size() / h;
        const std::size_t extra = pools[c].size() % h;
        std::size_t pos = 0;
        for (std::size_t r = 0; r < h; ++r) {
            const std::size_t take = base + (r < extra ? 1 : 0);
            for (std::size_t s = 0; s < take; ++s) a[holders[c][r]].push_back(pools[c][pos++]);
        }
    }
    return make_partition(std::move(a), ds.samples.labels, ds.num_classes);
}

}  // namespace

Partition partition(const Dataset& ds, const PartitionSpec& spec) {
    if (spec.num_clients < 1) throw ConfigError("num_clients must be at least 1");
    if (ds.size() < spec.num_clients) throw ConfigError("dataset has fewer samples than clients");
    switch (spec.scheme) {
        case PartitionScheme::IID: return partition_iid(ds, spec);
        case PartitionScheme::Dirichlet: return partition_dirichlet(ds, spec);
        case PartitionScheme::LabelSkew: return partition_label_skew(ds, spec);
    }
    throw ConfigError("unknown partition scheme");
}

Partition partition_difficulty(const Dataset& ds, const Partition& base, double f_ord,
                               std::span<const double> expert_losses, std::uint64_t seed) {
    if (expert_losses.size() != ds.size()) throw ConfigError("expert_losses length must equal dataset size");
    if (!(f_ord >= 0.0 && f_ord <= 1.0)) throw ConfigError("f_ord must be in [0, 1]");
    validate_partition(base, ds);

    const std::size_t m = base.num_clients();
    auto pools = class_pools(ds);
    std::vector<std::vector<std::size_t>> a(m);
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
        auto& ranked = pools[c];  // ascending index, so ties keep index order
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](std::size_t x, std::size_t y) { return expert_losses[x] < expert_losses[y]; });

        std::vector<char> taken(ranked.size(), 0);
        std::vector<std::size_t> residual(m);
        std::size_t offset = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t count = base.class_counts[i][c];
            // Guard against f_ord * N landing a hair below an integer.
            const auto ordered = static_cast<std::size_t>(std::floor(f_ord * static_cast<double>(count) + 1e-9));
            for (std::size_t r = offset; r < offset + ordered; ++r) {
                a[i].push_back(ranked[r]);
                taken[r] = 1;
            }
            residual[i] = count - ordered;
            offset += count;
        }

        std::vector<std::size_t> rest;
        for (std::size_t r = 0; r < ranked.size(); ++r)
            if (!taken[r]) rest.push_back(ranked[r]);
        Rng rng = make_rng(seed, Stream::Reshuffle, {c});
        std::shuffle(rest.begin(), rest.end(), rng);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < residual[i]; ++r) a[i].push_back(rest[pos++]);
    }
    return make_partition(std::move(a), ds.samples.labels, ds.num_classes);
}

std::vector<double> partition_score_std(const Partition& part, std::span<const double> scores) {
    std::vector<double> out(part.num_clients());
    for (std::size_t i = 0; i < part.num_clients(); ++i) {
        const auto& idx = part.assignment[i];
        if (idx.empty()) throw PreconditionError("client " + std::to_string(i) + " holds no samples");
        double mean = 0.0;
        for (std::size_t j : idx) {
            if (j >= scores.size()) throw ConfigError("scores shorter than dataset");
            mean += scores[j];
        }
        mean /= static_cast<double>(idx.size());
        double var = 0.0;
        for (std::size_t j : idx) var += (scores[j] - mean) * (scores[j] - mean);
        out[i] = std::sqrt(var / static_cast<double>(idx.size()));
    }
    return out;
}

void write_dataset(std::ostream& os, const Dataset& ds) {
    os << "fedcurr-dataset 1\n" << ds.size() << ' ' << ds.dim() << ' ' << ds.num_classes << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        os << ds.samples.labels[i] << ' ' << format_real(ds.difficulty_noise[i]);
        for (double v : ds.samples.row(i)) os << ' ' << format_real(v);
        os << '\n';
    }
}

namespace {

std::string next_line(std::istream& is, int& line_no) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("unexpected end of file", line_no + 1);
    ++line_no;
    return line;
}

}  // namespace

Dataset read_dataset(std::istream& is) {
    int line_no = 0;
    if (next_line(is, line_no) != "fedcurr-dataset 1") throw ConfigError("not a fedcurr dataset file", line_no);
    std::istringstream header(next_line(is, line_no));
    std::size_t n = 0, dim = 0, classes = 0;
    if (!(header >> n >> dim >> classes) || dim == 0 || classes == 0)
        throw ConfigError("malformed dataset header", line_no);

    Dataset ds;
    ds.num_classes = classes;
    ds.samples.dim = dim;
    ds.samples.features.resize(n * dim);
    ds.samples.labels.resize(n);
    ds.difficulty_noise.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream row(next_line(is, line_no));
        int label = -1;
        if (!(row >> label >> ds.difficulty_noise[i]) || label < 0 || static_cast<std::size_t>(label) >= classes)
            throw ConfigError("malformed sample line", line_no);
        ds.samples.labels[i] = label;
        for (std::size_t k = 0; k < dim; ++k)
            if (!(row >> ds.samples.features[i * dim + k])) throw ConfigError("sample line too short", line_no);
    }
    return ds;
}

void write_partition(std::ostream& os, const Partition& part) {
    std::size_t n = 0;
    for (const auto& idx : part.assignment) n += idx.size();
    os << "fedcurr-partition 1\n" << part.num_clients() << ' ' << n << '\n';
    for (std::size_t i = 0; i < part.num_clients(); ++i) {
        os << i << ':';
        for (std::size_t idx : part.assignment[i]) os << ' ' << idx;
        os << '\n';
    }
}

Partition read_partition(std::istream& is, const Dataset& ds) {
    int line_no = 0;
    if (next_line(is, line_no) != "fedcurr-partition 1") throw ConfigError("not a fedcurr partition file", line_no);
    std::istringstream header(next_line(is, line_no));
    std::size_t m = 0, n = 0;
    if (!(header >> m >> n) || m == 0) throw ConfigError("malformed partition header", line_no);
    if (n != ds.size()) throw ConfigError("partition size does not match dataset", line_no);

    std::vector<std::vector<std::size_t>> a(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::istringstream row(next_line(is, line_no));
        std::size_t client = 0;
        char colon = 0;
        if (!(row >> client >> colon) || colon != ':' || client != i)
            throw ConfigError("malformed client line", line_no);
        std::size_t idx = 0;
        while (row >> idx) a[i].push_back(idx);
    }
    Partition p = make_partition(std::move(a), ds.samples.labels, ds.num_classes);
    validate_partition(p, ds);
    return p;
}

}  // namespace fedcurr
