#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace levy_expfun {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: the i-th output is mix64(key + i * golden). Each
// sample path gets its own key derived from (seed, stream, index), so results
// do not depend on how paths are split between threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : key_(mix64(seed ^ mix64(stream * 0x9e3779b97f4a7c15ULL ^ mix64(index + 0x632be59bd9b4e019ULL)))) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }
  // uniform on (0, 1)
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential() { return -std::log(uniform()); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
  // Marsaglia-Tsang
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal(), v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Substream identifiers, one per independent factor of an identity.
enum Stream : std::uint64_t {
  kStreamPath = 1,
  kStreamPerpetuity = 2,
  kStreamSupremum = 3,
  kStreamResidual = 4,
  kStreamResidualPool = 5,
  kStreamJ = 6,
  kStreamSubFunctional = 7,
  kStreamExponential = 8,
  kStreamSupremumLaw = 9,
  kStreamUndershoot = 10,
  kStreamResample = 11,
  kStreamGamma = 12,
};

// Worker count: LEVY_EXPFUN_THREADS if set to a positive integer, else hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEVY_EXPFUN_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

// Runs body(i) for i in [0, n) on contiguous blocks. Exceptions are rethrown
// in the caller, lowest worker first.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned w = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(n / 256, 1)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  for (unsigned k = 0; k < w; ++k) {
    threads.emplace_back([&, k] {
      std::size_t lo = n * k / w, hi = n * (k + 1) / w;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace levy_expfun
