#pragma once

#include <Eigen/Dense>

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gapfield {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Counterclockwise quarter turn; tangent convention is T = rot90(normal).
inline Vec2 rot90(const Vec2& a) { return Vec2(-a.y(), a.x()); }
inline Vec2 rot270(const Vec2& a) { return Vec2(a.y(), -a.x()); }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid geometry, inconsistent or unparsable configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Evaluation requested at a point where the quantity is undefined.
struct DomainError : Error {
  Vec2 point;
  DomainError(const std::string& msg, const Vec2& p) : Error(msg), point(p) {}
};

// A computation that cannot certify its own accuracy.
struct NumericalError : Error {
  using Error::Error;
};

// Worker cap: GAPFIELD_THREADS if set, else hardware concurrency.
inline int thread_budget() {
  static const int n = [] {
    if (const char* s = std::getenv("GAPFIELD_THREADS")) {
      const int v = std::atoi(s);
      if (v >= 1) return v < 256 ? v : 256;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return n;
}

// Static chunking; every index writes only its own output slot, so results
// do not depend on the worker count.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const int workers = thread_budget();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nw) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gapfield
