#pragma once

// Sequential simulation of asynchronous iterations driven by a schedule:
//
//   x_i(j) = G_i(v(j))   if i in S_j
//   x_i(j) = x_i(j-1)    otherwise
//
// where v(j) is the vector of exchanged values. With the exact policy
// v_i(j) = x_i(l_i(j)); the flexible policies substitute partial updates.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "asynciter/errors.hpp"
#include "asynciter/operator.hpp"
#include "asynciter/schedule.hpp"

namespace asynciter {

struct FlexiblePolicy {
  enum class Kind { exact, interpolate, inner_snapshot };

  Kind kind = Kind::exact;
  double theta = 1.0;     // interpolate
  std::size_t steps = 1;  // inner_snapshot

  static FlexiblePolicy exact() { return {}; }

  // theta * x_i(l_i(j)) + (1 - theta) * [G(x(l(j)))]_i
  static FlexiblePolicy interpolate(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("policy: theta must lie in [0, 1]");
    return {Kind::interpolate, theta, 1};
  }

  // [base_step^steps(x(l(j)))]_i
  static FlexiblePolicy inner_snapshot(std::size_t steps) {
    if (steps < 1) throw InputError("policy: inner_snapshot steps must be >= 1");
    return {Kind::inner_snapshot, 1.0, steps};
  }

  bool flexible() const { return kind != Kind::exact; }

  std::string name() const {
    switch (kind) {
      case Kind::exact: return "exact";
      case Kind::interpolate: return "interpolate";
      case Kind::inner_snapshot: return "inner_snapshot";
    }
    return "unknown";
  }
};

struct TraceRecord {
  std::vector<std::size_t> steering;
  std::vector<Label> labels;
  Vector exchanged;                  // full-length v(j)
  std::vector<Vector> block_values;  // new x_i(j), parallel to `steering`
};

struct Trace {
  BlockPartition blocks;
  FlexiblePolicy policy;
  DelayClass delay_class = DelayClass::synchronous;
  std::uint64_t seed = 0;
  Vector x0;
  std::vector<TraceRecord> records;  // records[j-1] is iteration j
  Vector final_iterate;

  std::size_t horizon() const { return records.size(); }
  std::size_t n_blocks() const { return blocks.size(); }

  const TraceRecord& at(std::size_t j) const {
    if (j < 1 || j > records.size()) {
      throw InputError("trace: iteration " + std::to_string(j) + " outside 1.." +
                       std::to_string(records.size()));
    }
    return records[j - 1];
  }

  Label min_label(std::size_t j) const {
    const auto& l = at(j).labels;
    return *std::min_element(l.begin(), l.end());
  }
};

namespace detail {

inline void apply_record(const BlockPartition& blocks, const TraceRecord& rec, Vector& x) {
  for (std::size_t k = 0; k < rec.steering.size(); ++k) {
    const auto& coords = blocks.block(rec.steering[k]);
    for (std::size_t c = 0; c < coords.size(); ++c) {
      x[coords[c]] = rec.block_values[k][static_cast<Index>(c)];
    }
  }
}

inline Vector gather_block(const BlockPartition& blocks, const Vector& x, std::size_t b) {
  const auto& coords = blocks.block(b);
  Vector out(static_cast<Index>(coords.size()));
  for (std::size_t c = 0; c < coords.size(); ++c) out[static_cast<Index>(c)] = x[coords[c]];
  return out;
}

}  // namespace detail

inline Trace run(const GradientTypeOperator& op, const Vector& x0, const Schedule& s,
                 const FlexiblePolicy& policy = FlexiblePolicy::exact()) {
  const BlockPartition& blocks = op.problem().blocks();
  if (s.n_blocks != blocks.size()) {
    throw InputError("run: schedule has " + std::to_string(s.n_blocks) + " blocks, problem has " +
                     std::to_string(blocks.size()));
  }
  detail::require_dim(x0, op.dim(), "run: x0");
  detail::require_finite(x0, "run: x0");
  if (policy.kind == FlexiblePolicy::Kind::interpolate &&
      !(policy.theta >= 0.0 && policy.theta <= 1.0)) {
    throw InputError("run: theta must lie in [0, 1]");
  }
  if (policy.kind == FlexiblePolicy::Kind::inner_snapshot &&
      (policy.steps < 1 || policy.steps > op.inner_steps())) {
    throw InputError("run: inner_snapshot steps must lie in [1, inner_steps]");
  }
  if (const auto report = validate(s); !report.overall) {
    std::string names;
    for (const auto& f : report.failures()) names += (names.empty() ? "" : ", ") + f;
    throw InputError("run: schedule fails validation (" + names + ")");
  }

  Trace t;
  t.blocks = blocks;
  t.policy = policy;
  t.delay_class = s.delay_class;
  t.seed = s.seed;
  t.x0 = x0;
  t.records.reserve(s.horizon());

  const std::size_t nb = blocks.size();
  std::vector<Vector> history;
  history.reserve(s.horizon() + 1);
  history.push_back(x0);

  Vector stale(op.dim());
  for (std::size_t j = 1; j <= s.horizon(); ++j) {
    const Event& e = s.events[j - 1];
    TraceRecord rec;
    rec.steering = e.steering;
    rec.labels = e.labels;
    try {
      // x(l(j)) = (x_1(l_1(j)), ..., x_n(l_n(j)))
      for (std::size_t i = 0; i < nb; ++i) blocks.copy_block(history[e.labels[i]], stale, i);

      switch (policy.kind) {
        case FlexiblePolicy::Kind::exact:
          rec.exchanged = stale;
          break;
        case FlexiblePolicy::Kind::interpolate: {
          const Vector fresh = op.apply(stale);
          rec.exchanged = policy.theta * stale + (1.0 - policy.theta) * fresh;
          break;
        }
        case FlexiblePolicy::Kind::inner_snapshot:
          rec.exchanged = op.apply_steps(stale, policy.steps);
          break;
      }

      const Vector updated = op.apply(rec.exchanged);
      rec.block_values.reserve(e.steering.size());
      for (std::size_t i : e.steering) {
        rec.block_values.push_back(detail::gather_block(blocks, updated, i));
      }
    } catch (const NumericError& err) {
      throw NumericError(std::string(err.what()) + " at iteration " + std::to_string(j), j);
    }

    Vector next = history.back();
    detail::apply_record(blocks, rec, next);
    if (!next.allFinite()) {
      throw NumericError("run: non-finite iterate at iteration " + std::to_string(j), j);
    }
    history.push_back(std::move(next));
    t.records.push_back(std::move(rec));
  }
  t.final_iterate = history.back();
  return t;
}

// x(j) replayed from x0 through the recorded block updates.
inline Vector iterate_at(const Trace& t, std::size_t j) {
  if (j > t.horizon()) {
    throw InputError("iterate_at: j = " + std::to_string(j) + " exceeds horizon " +
                     std::to_string(t.horizon()));
  }
  Vector x = t.x0;
  for (std::size_t r = 0; r < j; ++r) detail::apply_record(t.blocks, t.records[r], x);
  return x;
}

// x(0), ..., x(J) in one pass.
inline std::vector<Vector> iterates(const Trace& t) {
  std::vector<Vector> xs;
  xs.reserve(t.horizon() + 1);
  xs.push_back(t.x0);
  for (const auto& rec : t.records) {
    Vector x = xs.back();
    detail::apply_record(t.blocks, rec, x);
    xs.push_back(std::move(x));
  }
  return xs;
}

}  // namespace asynciter
