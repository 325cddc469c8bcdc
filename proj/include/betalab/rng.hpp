#ifndef BETALAB_RNG_HPP
#define BETALAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace betalab {

namespace detail {

/// splitmix64 step; used to turn (master_seed, stream_index) into
/// well-separated generator states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Seedable deterministic random stream.  (master_seed, stream_index)
/// fully determines the output sequence; distinct stream indices give
/// statistically independent streams.  Single-owner: not safe to share
/// across threads, but cheap to create one per replicate.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {
    std::uint64_t s = master_seed ^ (0x6a09e667f3bcc909ULL * (stream_index + 1));
    const std::uint32_t words[8] = {
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32)};
    std::seed_seq seq(words, words + 8);
    gen_.seed(seq);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in the open interval (0,1); never returns 0 or 1,
  /// so logs of it are always finite.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate.
  double exponential(double rate) {
    if (!(rate > 0.0)) {
      throw std::domain_error("RngStream::exponential: rate must be > 0");
    }
    return -std::log(uniform()) / rate;
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 gen_;
};

}  // namespace betalab

#endif
