#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace gsrcpd {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Seedable, splittable random source.
///
/// Rng(seed, stream) is a deterministic function of both arguments, so work
/// item b can own Rng(seed, b) and produce the same draws regardless of how
/// items are scheduled across threads.
class Rng {
  public:
    using engine_type = std::mt19937_64;
    using result_type = engine_type::result_type;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
        std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        std::uint32_t words[8];
        for (int i = 0; i < 4; ++i) {
            const std::uint64_t v = detail::splitmix64(s);
            words[2 * i] = static_cast<std::uint32_t>(v);
            words[2 * i + 1] = static_cast<std::uint32_t>(v >> 32);
        }
        std::seed_seq seq(std::begin(words), std::end(words));
        engine_.seed(seq);
    }

    /// Child generator for sub-stream `stream`; does not advance this one.
    [[nodiscard]] Rng split(std::uint64_t stream) const {
        std::uint64_t s = seed_ ^ (0x8cb92ba72f3d8dd7ULL * (stream_ + 1));
        return Rng(detail::splitmix64(s), stream);
    }

    static constexpr result_type min() { return engine_type::min(); }
    static constexpr result_type max() { return engine_type::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }
    void fill_normal(std::span<double> out, double mean = 0.0, double sd = 1.0) {
        for (auto& v : out) v = mean + sd * normal_(engine_);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

    engine_type& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gsrcpd
