#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fedcurr {

using Rng = std::mt19937_64;

// Stream tags keep independent consumers of the same (seed, round, client) key
// from sharing a generator.
enum class Stream : std::uint64_t {
    Init = 1,
    Data = 2,
    Partition = 3,
    Selection = 4,
    Scoring = 5,
    Training = 6,
    MonteCarlo = 7,
    Problem = 8,
    Reshuffle = 9,
};

/// Independent generator keyed by a seed, a stream tag and any number of indices.
inline Rng make_rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> keys = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(4 + 2 * keys.size());
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    push(static_cast<std::uint64_t>(stream));
    for (auto k : keys) push(k);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace fedcurr
