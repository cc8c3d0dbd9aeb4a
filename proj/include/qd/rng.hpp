#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qd::rng {

// Philox4x64-10 counter-based generator.
//
// The block function maps a 256-bit counter and a 128-bit key to 256 bits
// of output through ten bijective rounds.  Distinct (key, counter) pairs
// give statistically independent words, so parallel substreams are obtained
// by simply using distinct keys; no jump-ahead bookkeeping is needed.
// Constants follow the original Random123 specification, which is also what
// numpy.random.Philox uses, so outputs can be checked against an external
// implementation word for word.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter counter, Key key);
};

// Deterministic random stream: a thin URBG facade over Philox4x64-10.
//
// The key encodes (seed, substream id); the counter enumerates blocks.
// Each block yields four 64-bit words which are handed out one at a time.
// Copying a Stream copies its position.  Satisfies
// std::uniform_random_bit_generator, so it can drive the standard
// <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed, std::uint64_t substream = 0)
      : key_{seed, substream}, counter_{0, 0, 0, 0} {}

  // Independent child stream.  Children of distinct ids, and the parent
  // itself, never share a (key, counter) pair.  The id space is per seed:
  // substream(i) of any stream with seed s equals Stream(s, mix(parent, i)).
  Stream substream(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on the open interval (0,1); uses the top 53 bits, never
  // returns 0 or 1 exactly.
  double uniform01();

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t substream_id() const { return key_[1]; }

 private:
  Philox4x64::Key key_;
  Philox4x64::Counter counter_;
  std::array<std::uint64_t, 4> buffer_{};
  int buffered_ = 0;  // words left in buffer_
};

// Standard exponential (rate 1) by inversion.
double exponential(Stream& s);

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; handles all shape > 0.
double gamma(Stream& s, double shape);

// Beta(a, b) from two gamma draws.
double beta(Stream& s, double a, double b);

// Standard normal (used by the gamma sampler; exposed for tests).
double normal(Stream& s);

}  // namespace qd::rng
