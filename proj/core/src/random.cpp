#include "gsa/random.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace gsa {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer; full 64-bit avalanche.
std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      state_(mix64(mix64(seed) ^ mix64(stream_id ^ 0xA5A5A5A55A5A5A5AULL))) {}

std::uint64_t RandomStream::next_u64() {
    state_ += kGolden;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double RandomStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_open_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_open_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_below: n must be >= 1");
    }
    // Rejection sampling over the largest multiple of n.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return r % n;
}

std::vector<int> RandomStream::sample_without_replacement(int n, int m) {
    if (m < 0 || n < 0 || m > n) {
        throw std::invalid_argument("sample_without_replacement: need 0 <= m <= n");
    }
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(m));
    std::unordered_set<int> seen;
    seen.reserve(static_cast<std::size_t>(m) * 2);

    // Floyd: for j = n-m .. n-1, draw t in [0, j]; take t unless taken, else j.
    for (int j = n - m; j < n; ++j) {
        const int t = static_cast<int>(uniform_below(static_cast<std::uint64_t>(j) + 1));
        if (seen.insert(t).second) {
            picked.push_back(t);
        } else {
            seen.insert(j);
            picked.push_back(j);
        }
    }
    return picked;
}

RandomStream RandomStream::derive(std::uint64_t tag) const {
    return RandomStream(seed_, mix64(stream_id_ ^ mix64(tag ^ 0xC3C3C3C33C3C3C3CULL)));
}

}  // namespace gsa
