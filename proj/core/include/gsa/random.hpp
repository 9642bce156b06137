#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gsa {

// Counter-based random stream. A stream is fully identified by a
// (seed, stream_id) pair: equal pairs replay bit-identical sequences, and
// distinct stream_ids under one seed give statistically independent
// sequences. Resampling task b simply opens RandomStream(seed, b), so
// parallel schedules cannot change any result.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_double();

    // Uniform on (0, 1); never returns 0, safe under log().
    double next_open_double();

    // Standard normal (Box-Muller, pair-cached).
    double next_normal();

    // Uniform integer on [0, n). Unbiased; requires n >= 1.
    std::uint64_t uniform_below(std::uint64_t n);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Uniform m-subset of {0, ..., n-1} without replacement (Floyd's
    // algorithm); element order is the deterministic insertion order.
    std::vector<int> sample_without_replacement(int n, int m);

    // Child stream independent of this one, keyed by tag. Children with
    // distinct tags are mutually independent and replayable.
    RandomStream derive(std::uint64_t tag) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace gsa
