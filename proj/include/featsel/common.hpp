#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace featsel {

/// Base class for every error raised by the library. The exit code is the
/// process status the CLI reports for this class of failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Bad flags, out-of-range parameters, unknown methods.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 1) {}
};

/// Malformed input data: unreadable files, bad cells, unusable targets.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, 2) {}
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 3) {}
};

/// 64-bit FNV-1a over raw bytes, chainable through `state`.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t state = 0xcbf29ce484222325ULL);

/// Child seed for the `index`-th stream of component `component`. Every
/// random draw in the library flows from a master seed through this.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                          std::uint64_t index = 0);

/// Portable random stream. The engine is std::mt19937_64; the
/// distributions are implemented here so results do not depend on the
/// standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t index(std::size_t n);
  /// Standard normal (Marsaglia polar method, no cached spare).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. Callers write to
/// disjoint, pre-sized outputs, so results never depend on scheduling. The
/// first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body);

/// Default worker count: hardware concurrency, at least 1.
unsigned default_workers();

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parses the whole of `text` as a double. Returns false on anything else.
bool parse_double(std::string_view text, double& out);

}  // namespace featsel
