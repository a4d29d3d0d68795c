#pragma once

// Steering sets S_j and label tuples (l_1(j), ..., l_n(j)) for j = 1..J.
//
// Block ids are 0-based; iteration indices are 1-based with label 0 naming
// the initial iterate x(0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asynciter/errors.hpp"
#include "asynciter/random.hpp"

namespace asynciter {

using Label = std::size_t;

enum class DelayClass { synchronous, bounded, unbounded_admissible, out_of_order };

inline std::string_view to_string(DelayClass c) {
  switch (c) {
    case DelayClass::synchronous: return "synchronous";
    case DelayClass::bounded: return "bounded";
    case DelayClass::unbounded_admissible: return "unbounded_admissible";
    case DelayClass::out_of_order: return "out_of_order";
  }
  return "unknown";
}

inline DelayClass delay_class_from_string(std::string_view s) {
  if (s == "synchronous") return DelayClass::synchronous;
  if (s == "bounded") return DelayClass::bounded;
  if (s == "unbounded_admissible") return DelayClass::unbounded_admissible;
  if (s == "out_of_order") return DelayClass::out_of_order;
  throw InputError("unknown delay class '" + std::string(s) + "'");
}

struct Event {
  std::vector<std::size_t> steering;  // S_j, sorted ascending
  std::vector<Label> labels;          // l_i(j) for every block i

  bool updates(std::size_t block) const {
    return std::binary_search(steering.begin(), steering.end(), block);
  }

  // l(j) = min_i l_i(j)
  Label min_label() const { return *std::min_element(labels.begin(), labels.end()); }

  friend bool operator==(const Event&, const Event&) = default;
};

struct Schedule {
  std::size_t n_blocks = 0;
  DelayClass delay_class = DelayClass::synchronous;
  std::size_t bound = 0;  // b, meaningful for the bounded class
  std::uint64_t seed = 0;
  std::vector<Event> events;  // events[j-1] is iteration j

  std::size_t horizon() const { return events.size(); }

  const Event& at(std::size_t j) const {
    if (j < 1 || j > events.size()) {
      throw InputError("schedule: iteration " + std::to_string(j) + " outside 1.." +
                       std::to_string(events.size()));
    }
    return events[j - 1];
  }

  std::size_t delay(std::size_t j, std::size_t block) const { return j - at(j).labels[block]; }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// ---------------------------------------------------------------------------
// Generation

enum class ScheduleKind { synchronous, bounded, unbounded, baudet, out_of_order };

inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::synchronous: return "synchronous";
    case ScheduleKind::bounded: return "bounded";
    case ScheduleKind::unbounded: return "unbounded";
    case ScheduleKind::baudet: return "baudet";
    case ScheduleKind::out_of_order: return "out_of_order";
  }
  return "unknown";
}

inline ScheduleKind schedule_kind_from_string(std::string_view s) {
  if (s == "synchronous") return ScheduleKind::synchronous;
  if (s == "bounded") return ScheduleKind::bounded;
  if (s == "unbounded" || s == "unbounded_admissible") return ScheduleKind::unbounded;
  if (s == "baudet") return ScheduleKind::baudet;
  if (s == "out_of_order") return ScheduleKind::out_of_order;
  throw InputError("unknown schedule kind '" + std::string(s) + "'");
}

struct ScheduleParams {
  std::size_t bound = 3;             // bounded / out_of_order: fresh delays drawn from 1..bound
  double update_probability = 0.5;   // chance each block joins S_j
  double growth = 1.0;               // unbounded: delays drawn from 1..ceil(growth * sqrt(j))
  double reorder_rate = 0.3;         // out_of_order: chance a label goes backwards
  std::size_t reorder_depth = 0;     // out_of_order: extra staleness, 0 means 2 * bound
};

namespace detail {

// Random nonempty steering sets in which no block waits more than n_blocks
// iterations between updates.
class SteeringDraw {
 public:
  SteeringDraw(std::size_t n_blocks, double p) : n_(n_blocks), p_(p), last_(n_blocks, 0) {}

  std::vector<std::size_t> next(std::size_t j, Rng& rng) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n_; ++i) {
      if (rng.bernoulli(p_) || j - last_[i] >= n_) s.push_back(i);
    }
    if (s.empty()) s.push_back(static_cast<std::size_t>(rng.integer(0, n_ - 1)));
    for (std::size_t i : s) last_[i] = j;
    return s;
  }

 private:
  std::size_t n_;
  double p_;
  std::vector<std::size_t> last_;
};

inline Schedule make_synchronous(std::size_t n_blocks, std::size_t horizon) {
  Schedule s;
  s.n_blocks = n_blocks;
  s.delay_class = DelayClass::synchronous;
  std::vector<std::size_t> all(n_blocks);
  for (std::size_t i = 0; i < n_blocks; ++i) all[i] = i;
  s.events.reserve(horizon);
  for (std::size_t j = 1; j <= horizon; ++j) {
    s.events.push_back(Event{all, std::vector<Label>(n_blocks, j - 1)});
  }
  return s;
}

// Processor 1 finishes block 0 at times 1, 2, 3, ...; processor 2 finishes its
// k-th update of block 1 at time k(k+1)/2. Completions sorted by time (processor
// 1 first on ties) are the iterations. Each update reads its own previous value
// and the most recent completion of the other block.
inline Schedule make_baudet(std::size_t horizon) {
  Schedule s;
  s.n_blocks = 2;
  s.delay_class = DelayClass::unbounded_admissible;
  s.events.reserve(horizon);
  std::uint64_t t1 = 1;         // next completion time of processor 1
  std::uint64_t k2 = 1;         // index of processor 2's next update
  std::array<Label, 2> last{0, 0};
  for (std::size_t j = 1; j <= horizon; ++j) {
    const std::uint64_t t2 = k2 * (k2 + 1) / 2;
    const std::size_t p = t1 <= t2 ? 0 : 1;
    Event e;
    e.steering = {p};
    e.labels = {last[0], last[1]};
    s.events.push_back(std::move(e));
    last[p] = j;
    if (p == 0) {
      ++t1;
    } else {
      ++k2;
    }
  }
  return s;
}

}  // namespace detail

// Deterministic in (kind, n_blocks, horizon, params, seed).
inline Schedule generate(ScheduleKind kind, std::size_t n_blocks, std::size_t horizon,
                         const ScheduleParams& params, std::uint64_t seed) {
  if (n_blocks < 1) throw InputError("generate: n_blocks must be >= 1");
  if (horizon < 1) throw InputError("generate: horizon must be >= 1");
  if (!(params.update_probability >= 0.0 && params.update_probability <= 1.0)) {
    throw InputError("generate: update_probability must lie in [0, 1]");
  }

  if (kind == ScheduleKind::synchronous) {
    Schedule s = detail::make_synchronous(n_blocks, horizon);
    s.seed = seed;
    return s;
  }
  if (kind == ScheduleKind::baudet) {
    if (n_blocks != 2) throw InputError("generate: baudet schedule requires n_blocks = 2");
    Schedule s = detail::make_baudet(horizon);
    s.seed = seed;
    return s;
  }

  if ((kind == ScheduleKind::bounded || kind == ScheduleKind::out_of_order) && params.bound < 1) {
    throw InputError("generate: bound must be >= 1");
  }
  if (kind == ScheduleKind::unbounded && !(params.growth > 0.0)) {
    throw InputError("generate: growth must be positive");
  }
  if (kind == ScheduleKind::out_of_order &&
      !(params.reorder_rate >= 0.0 && params.reorder_rate <= 1.0)) {
    throw InputError("generate: reorder_rate must lie in [0, 1]");
  }

  Rng rng(seed);
  detail::SteeringDraw steering(n_blocks, params.update_probability);
  Schedule s;
  s.n_blocks = n_blocks;
  s.seed = seed;
  s.events.reserve(horizon);

  // front[i]: freshest label handed out so far for block i (monotone).
  std::vector<Label> front(n_blocks, 0);
  std::vector<Label> prev(n_blocks, 0);
  const std::size_t depth = params.reorder_depth ? params.reorder_depth : 2 * params.bound;

  switch (kind) {
    case ScheduleKind::bounded: s.delay_class = DelayClass::bounded; s.bound = params.bound; break;
    case ScheduleKind::unbounded: s.delay_class = DelayClass::unbounded_admissible; break;
    default: s.delay_class = DelayClass::out_of_order; break;
  }

  for (std::size_t j = 1; j <= horizon; ++j) {
    Event e;
    e.steering = steering.next(j, rng);
    e.labels.resize(n_blocks);
    for (std::size_t i = 0; i < n_blocks; ++i) {
      std::size_t max_delay = params.bound;
      if (kind == ScheduleKind::unbounded) {
        max_delay = static_cast<std::size_t>(
            std::ceil(params.growth * std::sqrt(static_cast<double>(j))));
        max_delay = std::max<std::size_t>(max_delay, 1);
      }
      const std::size_t d = static_cast<std::size_t>(rng.integer(1, max_delay));
      const Label fresh = j > d ? j - d : 0;
      front[i] = std::max(front[i], fresh);
      Label l = front[i];
      if (kind == ScheduleKind::out_of_order && rng.bernoulli(params.reorder_rate)) {
        // Strictly older than the previous label, never staler than bound + depth.
        const Label floor = j > params.bound + depth ? j - params.bound - depth : 0;
        if (prev[i] > floor) l = static_cast<Label>(rng.integer(floor, prev[i] - 1));
      }
      e.labels[i] = l;
      prev[i] = l;
    }
    s.events.push_back(std::move(e));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  struct Structure {
    bool pass = true;
    std::string detail;
  } structure;  // nonempty S_j, ids in range, one label per block

  struct ConditionA {
    bool pass = true;
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;  // (block, j)
  } condition_a;  // l_i(j) <= j - 1

  struct ConditionB {
    bool pass = true;
    bool applicable = true;  // false when the horizon is too short for disjoint quarters
    std::optional<std::size_t> failing_block;
    std::vector<Label> head_max;  // per block, max label over the first quarter
    std::vector<Label> tail_min;  // per block, min label over the last quarter
  } condition_b_finite;  // finite-horizon proxy for l_i(j) -> infinity

  struct ConditionC {
    bool pass = true;
    std::size_t window = 0;
    std::optional<std::size_t> starved_block;
    std::size_t last_update = 0;  // last update of the starved block before the gap (0: none)
  } condition_c;  // every block updated in every window of `window` iterations

  struct ConditionD {
    bool applicable = false;  // bounded class only
    bool pass = true;
    std::size_t witnessed_bound = 0;  // max_{i,j} d_i(j)
    std::optional<std::pair<std::size_t, std::size_t>> first_violation;  // (block, j)
  } condition_d;

  bool overall = true;

  // Names of the failed checks, in report order.
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    if (!structure.pass) out.push_back("structure");
    if (!condition_a.pass) out.push_back("condition_a");
    if (!condition_b_finite.pass) out.push_back("condition_b_finite");
    if (!condition_c.pass) out.push_back("condition_c");
    if (condition_d.applicable && !condition_d.pass) out.push_back("condition_d");
    return out;
  }
};

inline std::size_t coverage_window(std::size_t n_blocks, std::size_t horizon) {
  return std::max<std::size_t>(2 * n_blocks, (horizon + 7) / 8);
}

inline ValidationReport validate(const Schedule& s) {
  ValidationReport r;
  const std::size_t n = s.n_blocks;
  const std::size_t J = s.horizon();

  if (n == 0) {
    r.structure = {false, "n_blocks is zero"};
    r.overall = false;
    return r;
  }
  for (std::size_t j = 1; j <= J && r.structure.pass; ++j) {
    const Event& e = s.events[j - 1];
    if (e.steering.empty()) {
      r.structure = {false, "S_" + std::to_string(j) + " is empty"};
    } else if (e.labels.size() != n) {
      r.structure = {false, "iteration " + std::to_string(j) + " carries " +
                                std::to_string(e.labels.size()) + " labels"};
    } else if (!std::is_sorted(e.steering.begin(), e.steering.end()) ||
               std::adjacent_find(e.steering.begin(), e.steering.end()) != e.steering.end() ||
               e.steering.back() >= n) {
      r.structure = {false, "S_" + std::to_string(j) + " has duplicate or out-of-range blocks"};
    }
  }
  if (!r.structure.pass) {
    r.overall = false;
    return r;
  }

  // a)
  for (std::size_t j = 1; j <= J && r.condition_a.pass; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (s.events[j - 1].labels[i] > j - 1) {
        r.condition_a.pass = false;
        r.condition_a.first_violation = {i, j};
        break;
      }
    }
  }

  // b) proxy: every label in the last quarter beats every label in the first.
  const std::size_t quarter = std::max<std::size_t>(1, J / 4);
  r.condition_b_finite.applicable = 2 * quarter <= J && J >= 2;
  if (r.condition_b_finite.applicable) {
    r.condition_b_finite.head_max.assign(n, 0);
    r.condition_b_finite.tail_min.assign(n, static_cast<Label>(-1));
    for (std::size_t j = 1; j <= quarter; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        r.condition_b_finite.head_max[i] =
            std::max(r.condition_b_finite.head_max[i], s.events[j - 1].labels[i]);
      }
    }
    for (std::size_t j = J - quarter + 1; j <= J; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        r.condition_b_finite.tail_min[i] =
            std::min(r.condition_b_finite.tail_min[i], s.events[j - 1].labels[i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (r.condition_b_finite.tail_min[i] <= r.condition_b_finite.head_max[i]) {
        r.condition_b_finite.pass = false;
        r.condition_b_finite.failing_block = i;
        break;
      }
    }
  }

  // c) proxy: windowed coverage.
  const std::size_t w = coverage_window(n, J);
  r.condition_c.window = w;
  for (std::size_t i = 0; i < n && r.condition_c.pass; ++i) {
    // Gaps between consecutive updates, with sentinels at 0 and J + 1.
    std::size_t prev = 0;
    std::optional<std::size_t> gap_start;
    bool seen = false;
    for (std::size_t j = 1; j <= J + 1 && !gap_start; ++j) {
      const bool hit = j == J + 1 || s.events[j - 1].updates(i);
      if (!hit) continue;
      if (J > w && j - prev > w) gap_start = prev;
      if (j <= J) seen = true;
      prev = j;
    }
    if (!seen || gap_start) {
      r.condition_c.pass = false;
      r.condition_c.starved_block = i;
      r.condition_c.last_update = gap_start.value_or(0);
    }
  }

  // d) with witness b(j) = min(b, j); delays counted from the newest available
  // iterate, so d_i(j) = j - l_i(j) may reach b.
  if (s.delay_class == DelayClass::bounded) {
    r.condition_d.applicable = true;
    if (s.bound < 1) {
      r.condition_d.pass = false;
    }
    for (std::size_t j = 1; j <= J; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const Label l = s.events[j - 1].labels[i];
        if (l > j - 1) continue;  // reported under a)
        const std::size_t d = j - l;
        r.condition_d.witnessed_bound = std::max(r.condition_d.witnessed_bound, d);
        if (d > s.bound && r.condition_d.pass) {
          r.condition_d.pass = false;
          r.condition_d.first_violation = {i, j};
        }
      }
    }
  }

  r.overall = r.structure.pass && r.condition_a.pass && r.condition_b_finite.pass &&
              r.condition_c.pass && (!r.condition_d.applicable || r.condition_d.pass);
  return r;
}

}  // namespace asynciter
