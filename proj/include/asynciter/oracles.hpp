#pragma once

// Brute-force reference implementations. Each one recomputes a quantity from
// its definition without sharing code with the production path, and is used by
// the test suites and the `oracle` CLI subcommand.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "asynciter/random.hpp"
#include "asynciter/schedule.hpp"

namespace asynciter::oracle {

// Macro-iteration indices straight from the definition: for each k, scan
// candidate j = 1, 2, ... and rebuild the union of S_r over all r <= j with
// j_k <= min_h l_h(r) <= r from scratch.
inline std::vector<std::size_t> macro_iterations(const Schedule& s) {
  std::vector<std::size_t> out{0};
  const std::size_t J = s.horizon();
  while (true) {
    const std::size_t jk = out.back();
    std::size_t found = 0;
    for (std::size_t j = 1; j <= J && !found; ++j) {
      std::set<std::size_t> covered;
      for (std::size_t r = 1; r <= j; ++r) {
        const auto& labels = s.events[r - 1].labels;
        const Label l = *std::min_element(labels.begin(), labels.end());
        if (jk <= l && l <= r) covered.insert(s.events[r - 1].steering.begin(),
                                              s.events[r - 1].steering.end());
      }
      if (covered.size() == s.n_blocks) found = j;
    }
    if (!found) break;
    out.push_back(found);
  }
  return out;
}

// Arbitrary events obeying only l_i(j) <= j - 1 and S_j nonempty.
inline Schedule random_events(std::size_t n_blocks, std::size_t horizon, Rng& rng) {
  Schedule s;
  s.n_blocks = n_blocks;
  s.delay_class = DelayClass::out_of_order;
  for (std::size_t j = 1; j <= horizon; ++j) {
    Event e;
    for (std::size_t i = 0; i < n_blocks; ++i) {
      if (rng.bernoulli(0.4)) e.steering.push_back(i);
    }
    if (e.steering.empty()) e.steering.push_back(static_cast<std::size_t>(rng.integer(0, n_blocks - 1)));
    for (std::size_t i = 0; i < n_blocks; ++i) {
      // Mostly recent labels, occasionally anything in the past.
      const std::uint64_t lo = rng.bernoulli(0.8) && j > 4 ? j - 4 : 0;
      e.labels.push_back(static_cast<Label>(rng.integer(lo, j - 1)));
    }
    s.events.push_back(std::move(e));
  }
  return s;
}

enum class GridPenalty { l1, box };

// argmin over a uniform grid of g(v) + (v - x)^2 / (2 gamma) in one dimension.
// For l1, `a` is lambda; for box, [a, b] is the box.
inline double grid_prox(GridPenalty kind, double x, double gamma, double a, double b,
                        double resolution) {
  double lo;
  double hi;
  if (kind == GridPenalty::l1) {
    lo = std::min(x, 0.0) - 1.0;
    hi = std::max(x, 0.0) + 1.0;
  } else {
    lo = a;
    hi = b;
  }
  const auto steps = static_cast<std::int64_t>(std::ceil((hi - lo) / resolution));
  double best_v = lo;
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k <= steps; ++k) {
    const double v = std::min(hi, lo + static_cast<double>(k) * resolution);
    const double penalty = kind == GridPenalty::l1 ? a * std::abs(v) : 0.0;
    const double val = penalty + (v - x) * (v - x) / (2.0 * gamma);
    if (val < best) {
      best = val;
      best_v = v;
    }
  }
  return best_v;
}

// Discrete-event replay of the two-processor example. Completion events sit in
// a priority queue keyed by (time, processor); processor 2's k-th phase starts
// when its (k-1)-th ends and lasts k time units.
inline std::vector<std::array<Label, 2>> baudet_labels(std::size_t horizon,
                                                       std::vector<std::size_t>* updater = nullptr) {
  using Completion = std::tuple<std::uint64_t, int, std::uint64_t>;  // time, processor, phase
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> queue;
  queue.emplace(1, 0, 1);
  queue.emplace(1, 1, 1);

  std::vector<std::array<Label, 2>> labels;
  std::array<Label, 2> newest{0, 0};
  for (std::size_t j = 1; j <= horizon; ++j) {
    const auto [time, proc, phase] = queue.top();
    queue.pop();
    labels.push_back(newest);
    if (updater) updater->push_back(static_cast<std::size_t>(proc));
    newest[static_cast<std::size_t>(proc)] = j;
    if (proc == 0) {
      queue.emplace(time + 1, 0, phase + 1);
    } else {
      queue.emplace(time + phase + 1, 1, phase + 1);
    }
  }
  return labels;
}

}  // namespace asynciter::oracle
