#pragma once
// Shared utilities: centralized numeric tolerances, a deterministic RNG that is
// stable across platforms and standard-library versions, and a monotonic timer.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace drrules {

// All numeric tolerances used by the optimization stack live here so that the
// contracts stated in the public API docs refer to a single source of truth.
namespace tol {
inline constexpr double feasibility = 1e-7;   // max primal constraint violation at "optimal"
inline constexpr double integrality = 1e-6;   // |x - round(x)| for integer-feasibility
inline constexpr double duality = 1e-6;       // |primal - dual| <= duality * (1 + |obj|)
inline constexpr double pivot = 1e-9;         // smallest acceptable simplex pivot magnitude
inline constexpr double reduced_cost = 1e-9;  // dual-feasibility threshold for entering variables
}  // namespace tol

// SplitMix64-based RNG. std::shuffle / std::uniform_int_distribution are
// implementation-defined, which would break byte-identical reports across
// toolchains; this generator and the helpers below are fully pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
  // caring about at our n, and deterministic everywhere).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream (e.g. one per data split) from this seed.
  Rng fork(std::uint64_t stream) const {
    Rng r(state_ ^ (0x632be59bd9b4e019ULL * (stream + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// FNV-1a, used for dataset fingerprints recorded in model provenance.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace drrules
