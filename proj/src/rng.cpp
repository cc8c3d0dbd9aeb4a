#include "qd/rng.hpp"

#include <cmath>

#include "qd/errors.hpp"

namespace qd::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline void round_once(Philox4x64::Counter& c, const Philox4x64::Key& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// SplitMix64 finalizer; decorrelates substream ids that differ in few bits.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Philox4x64::Counter Philox4x64::block(Counter counter, Key key) {
  round_once(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    round_once(counter, key);
  }
  return counter;
}

Stream Stream::substream(std::uint64_t id) const {
  Stream child(key_[0], mix64(key_[1] ^ mix64(id + 1)));
  return child;
}

Stream::result_type Stream::operator()() {
  if (buffered_ == 0) {
    buffer_ = Philox4x64::block(counter_, key_);
    buffered_ = 4;
    // 256-bit increment; the low word alone outlives any realistic run.
    if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0)
      ++counter_[3];
  }
  return buffer_[4 - buffered_--];
}

double Stream::uniform01() {
  // 53-bit mantissa, offset by half an ulp so the result sits strictly
  // inside (0,1).
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double exponential(Stream& s) { return -std::log(s.uniform01()); }

double normal(Stream& s) {
  // Polar Box-Muller, one variate per call (the discarded mate is cheap
  // next to the downstream integral-equation work).
  for (;;) {
    double u = 2.0 * s.uniform01() - 1.0;
    double v = 2.0 * s.uniform01() - 1.0;
    double q = u * u + v * v;
    if (q > 0.0 && q < 1.0) return u * std::sqrt(-2.0 * std::log(q) / q);
  }
}

double gamma(Stream& s, double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost the shape and correct with a power of a uniform.
    double g = gamma(s, shape + 1.0);
    return g * std::pow(s.uniform01(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal(s);
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = s.uniform01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta(Stream& s, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("beta: shape parameters must be positive");
  double x = gamma(s, a);
  double y = gamma(s, b);
  return x / (x + y);
}

}  // namespace qd::rng
