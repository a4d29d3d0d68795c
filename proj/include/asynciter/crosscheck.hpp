#pragma once

// Diffs of the production code against the brute-force oracles.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "asynciter/analysis.hpp"
#include "asynciter/oracles.hpp"
#include "asynciter/problem.hpp"
#include "asynciter/random.hpp"
#include "asynciter/schedule.hpp"

namespace asynciter::crosscheck {

struct Result {
  std::size_t matched = 0;
  std::size_t total = 0;
  double max_deviation = 0.0;  // prox only
  std::string first_mismatch;  // empty on full match

  bool ok() const { return matched == total; }

  std::string line() const {
    std::ostringstream out;
    if (ok()) {
      out << "MATCH " << matched << '/' << total;
    } else {
      out << "MISMATCH " << matched << '/' << total << ": " << first_mismatch;
    }
    return out.str();
  }
};

namespace detail {

template <class T>
std::string list(const std::vector<T>& v) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  out << ']';
  return out.str();
}

}  // namespace detail

// Incremental macro-iteration tracker against the from-scratch definition on
// random traces with 1..max_blocks blocks and horizon 1..max_horizon.
inline Result macro(std::size_t traces, std::size_t max_blocks, std::size_t max_horizon,
                    std::uint64_t seed) {
  Result r;
  Rng rng(seed);
  for (std::size_t t = 0; t < traces; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, max_blocks));
    const auto horizon = static_cast<std::size_t>(rng.integer(1, max_horizon));
    const Schedule s = oracle::random_events(n, horizon, rng);
    const auto fast = macro_iterations(s).indices;
    const auto slow = oracle::macro_iterations(s);
    ++r.total;
    if (fast == slow) {
      ++r.matched;
    } else if (r.first_mismatch.empty()) {
      r.first_mismatch = "trace " + std::to_string(t) + " (n=" + std::to_string(n) +
                         ", J=" + std::to_string(horizon) + "): tracker " + detail::list(fast) +
                         " vs definition " + detail::list(slow);
    }
  }
  return r;
}

// Closed-form 1-D prox against grid argmin, for l1 and box, `points` each.
inline Result prox(std::size_t points, double resolution, std::uint64_t seed) {
  Result r;
  Rng rng(seed);
  for (std::size_t k = 0; k < 2 * points; ++k) {
    const bool l1 = k < points;
    const double x = rng.uniform(-3.0, 3.0);
    const double gamma = rng.uniform(0.1, 2.0);
    double a;
    double b;
    NonsmoothPart g;
    if (l1) {
      a = rng.uniform(0.0, 1.0);
      b = 0.0;
      g = NonsmoothPart::l1(a);
    } else {
      a = rng.uniform(-2.0, 0.0);
      b = rng.uniform(0.0, 2.0);
      g = NonsmoothPart::box(Vector::Constant(1, a), Vector::Constant(1, b));
    }
    const double closed = g.prox(Vector::Constant(1, x), gamma)[0];
    const double grid = oracle::grid_prox(l1 ? oracle::GridPenalty::l1 : oracle::GridPenalty::box,
                                          x, gamma, a, b, resolution);
    const double dev = std::abs(closed - grid);
    r.max_deviation = std::max(r.max_deviation, dev);
    ++r.total;
    if (dev <= resolution) {
      ++r.matched;
    } else if (r.first_mismatch.empty()) {
      std::ostringstream out;
      out << (l1 ? "l1" : "box") << " x=" << x << " gamma=" << gamma << " a=" << a << " b=" << b
          << ": closed form " << closed << " vs grid " << grid;
      r.first_mismatch = out.str();
    }
  }
  return r;
}

// Generated two-processor schedule against the event-ordering replay, one
// comparison per iteration (updating block and both labels).
inline Result baudet(std::size_t horizon) {
  Result r;
  const Schedule s = generate(ScheduleKind::baudet, 2, horizon, {}, 0);
  std::vector<std::size_t> updater;
  const auto labels = oracle::baudet_labels(horizon, &updater);
  for (std::size_t j = 1; j <= horizon; ++j) {
    const Event& e = s.at(j);
    const bool same = e.steering == std::vector<std::size_t>{updater[j - 1]} &&
                      e.labels[0] == labels[j - 1][0] && e.labels[1] == labels[j - 1][1];
    ++r.total;
    if (same) {
      ++r.matched;
    } else if (r.first_mismatch.empty()) {
      r.first_mismatch = "j=" + std::to_string(j) + ": generated S=" + detail::list(e.steering) +
                         " l=" + detail::list(e.labels) + " vs replay S=[" +
                         std::to_string(updater[j - 1]) + "] l=[" + std::to_string(labels[j - 1][0]) +
                         "," + std::to_string(labels[j - 1][1]) + "]";
    }
  }
  return r;
}

}  // namespace asynciter::crosscheck
