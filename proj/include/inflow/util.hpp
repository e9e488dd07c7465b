#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace inflow {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline double dist(const Point& a, const Point& b) {
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2);
}

/// Worker count: hardware concurrency capped by INFLOW_NS_THREADS.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("INFLOW_NS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

/// Runs fn(i) for i in [0, n). Results must be written to disjoint slots
/// indexed by i so the outcome is independent of the thread count.
template <class F>
void parallel_tiles(std::size_t n, F&& fn) {
  const int workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([t, workers, n, &fn] {
      for (std::size_t i = t; i < n; i += static_cast<std::size_t>(workers)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// |x|^p with a fast path for small integer exponents.
inline double pow_abs(double x, double p) {
  const double a = std::abs(x);
  const int ip = static_cast<int>(p);
  if (static_cast<double>(ip) == p && ip >= 0 && ip <= 16) {
    double r = 1.0, base = a;
    int e = ip;
    while (e > 0) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }
  return std::pow(a, p);
}

inline double sqr(double x) { return x * x; }

/// Adaptive Simpson quadrature on [a,b].
namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace inflow
