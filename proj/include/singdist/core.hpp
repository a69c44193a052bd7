#pragma once
// Shared scalar types, 2D vectors, deterministic keyed RNG, and the error
// taxonomy used across the library.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace singdist {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// 2D vector over an arbitrary scalar (double for geometry, Complex for
/// analytically continued poses).
template <class T>
struct V2 {
  T x{}, y{};

  friend V2 operator+(const V2& a, const V2& b) { return {a.x + b.x, a.y + b.y}; }
  friend V2 operator-(const V2& a, const V2& b) { return {a.x - b.x, a.y - b.y}; }
  friend V2 operator*(const T& s, const V2& a) { return {s * a.x, s * a.y}; }
  friend V2 operator*(const V2& a, const T& s) { return {s * a.x, s * a.y}; }
  V2 operator-() const { return {-x, -y}; }
};

using Vec2 = V2<double>;
using CVec2 = V2<Complex>;

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// Scalar 2D cross product (z-component of the 3D cross product).
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

// ---------------------------------------------------------------------------
// Error taxonomy. Every library failure mode is a distinct type so callers
// (and tests) can react per condition.
// ---------------------------------------------------------------------------

#define SINGDIST_DEFINE_ERROR(NAME)                                   \
  class NAME : public std::runtime_error {                            \
   public:                                                            \
    explicit NAME(const std::string& what_arg = #NAME)                \
        : std::runtime_error(std::string(#NAME) + ": " + what_arg) {} \
  }

// Model / configuration errors.
SINGDIST_DEFINE_ERROR(ArchitectureSingular);  ///< degenerate design (a side collapses to a point)
SINGDIST_DEFINE_ERROR(DegenerateDesign);      ///< design incompatible with a requested construction
SINGDIST_DEFINE_ERROR(IncompatibleBranch);    ///< branch requested for an interpretation it does not serve

// Polynomial-layer errors.
SINGDIST_DEFINE_ERROR(UnknownVariable);
SINGDIST_DEFINE_ERROR(MissingAssignment);
SINGDIST_DEFINE_ERROR(ArityMismatch);

// Continuation errors.
SINGDIST_DEFINE_ERROR(StepFailure);
SINGDIST_DEFINE_ERROR(Diverged);
SINGDIST_DEFINE_ERROR(BudgetExceeded);
SINGDIST_DEFINE_ERROR(Stalled);
SINGDIST_DEFINE_ERROR(CountMismatch);
SINGDIST_DEFINE_ERROR(SeedTrackingFailure);

// Performance-index errors.
SINGDIST_DEFINE_ERROR(ZeroLegLength);
SINGDIST_DEFINE_ERROR(AllParallel);
SINGDIST_DEFINE_ERROR(SingularPose);
SINGDIST_DEFINE_ERROR(EmptyLocus);

// Input / serialization errors.
SINGDIST_DEFINE_ERROR(InvalidInput);  ///< malformed design/motion file or unwritable output

#undef SINGDIST_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Deterministic keyed RNG (counter-based SplitMix64). Every random draw in
// the library is keyed by (seed, purpose keys...), never by call order across
// threads, so multi-worker runs reproduce single-worker output bit for bit.
// ---------------------------------------------------------------------------

class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) : state_(mix(seed + kGamma)) {
    for (std::uint64_t k : keys) state_ = mix(state_ ^ (k + kGamma));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-modulus complex number with uniform phase.
  Complex unit_complex() { return std::polar(1.0, 2.0 * kPi * uniform()); }

  /// Complex number with modulus in [0.5, 1.5) and uniform phase: bounded away
  /// from zero, suitable for generic parameter values.
  Complex generic_complex() { return std::polar(uniform(0.5, 1.5), 2.0 * kPi * uniform()); }

  /// Complex number uniform in the square [-r, r]^2.
  Complex complex_box(double r = 1.0) { return {uniform(-r, r), uniform(-r, r)}; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Stable purpose keys for RNG derivation.
namespace rngkey {
inline constexpr std::uint64_t kMonodromy = 1;
inline constexpr std::uint64_t kGamma = 2;
inline constexpr std::uint64_t kSource = 3;
inline constexpr std::uint64_t kReversal = 4;
inline constexpr std::uint64_t kStartSystem = 5;
inline constexpr std::uint64_t kSeedPhase = 6;
inline constexpr std::uint64_t kSweep = 7;
inline constexpr std::uint64_t kKpi = 8;
inline constexpr std::uint64_t kTest = 99;
}  // namespace rngkey

/// Formats a double with 9 significant digits ("%.9g", C locale semantics).
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// FNV-1a hash of a string, used to derive stable RNG keys from family tags.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace singdist
