#pragma once

// Structural sequences extracted from a trace and the verifiers built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "asynciter/engine.hpp"
#include "asynciter/errors.hpp"

namespace asynciter {

// Weighted block-max norm |x|_u = max_i |x_i|_2 / u_i.
struct NormSpec {
  std::vector<double> weights;

  static NormSpec unit(std::size_t n_blocks) { return {std::vector<double>(n_blocks, 1.0)}; }

  void check(std::size_t n_blocks) const {
    if (weights.size() != n_blocks) throw InputError("norm: one weight per block required");
    for (double u : weights) {
      if (!(u > 0.0) || !std::isfinite(u)) throw InputError("norm: weights must be positive");
    }
  }

  double block(const BlockPartition& blocks, const Vector& x, std::size_t b) const {
    return blocks.block_norm(x, b) / weights[b];
  }

  double umax(const BlockPartition& blocks, const Vector& x) const {
    double m = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) m = std::max(m, block(blocks, x, b));
    return m;
  }
};

struct MacroIterationSequence {
  std::vector<std::size_t> indices{0};  // j_0 = 0 < j_1 < ...
  bool complete = true;                 // false: horizon ended inside a macro-iteration

  // Number of completed macro-iterations.
  std::size_t count() const { return indices.size() - 1; }

  // Largest k with j_k <= j.
  std::size_t k_at(std::size_t j) const {
    const auto it = std::upper_bound(indices.begin(), indices.end(), j);
    return static_cast<std::size_t>(it - indices.begin()) - 1;
  }
};

struct EpochSequence {
  std::vector<std::size_t> indices{0};  // k_0 = 0 < k_1 < ...
  std::vector<std::size_t> owner_map;   // block -> machine

  std::size_t count() const { return indices.size() - 1; }
};

struct Violation {
  std::size_t j = 0;
  std::size_t block = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Container for a family of inequalities lhs <= rhs (+ tolerance).
struct VerificationReport {
  std::string name;
  std::size_t checked = 0;
  std::vector<Violation> violations;
  double worst_slack = -std::numeric_limits<double>::infinity();  // max(lhs - rhs)
  double tolerance = 0.0;
  bool pass = true;
  std::vector<double> contraction_series;  // rate bound only

  void record(std::size_t j, std::size_t block, double lhs, double rhs) {
    ++checked;
    const double slack = lhs - rhs;
    worst_slack = std::max(worst_slack, slack);
    if (!(slack <= tolerance)) {
      violations.push_back({j, block, lhs, rhs});
      pass = false;
    }
  }
};

namespace detail {

// Works on anything exposing `.steering` and `.labels` per iteration
// (schedule events or trace records).
template <class Records>
MacroIterationSequence macro_iterations(const Records& records, std::size_t n_blocks) {
  MacroIterationSequence ms;
  std::vector<char> covered(n_blocks, 0);
  std::size_t count = 0;
  std::size_t current = 0;
  for (std::size_t r = 1; r <= records.size(); ++r) {
    const auto& rec = records[r - 1];
    if (*std::min_element(rec.labels.begin(), rec.labels.end()) < current) continue;
    for (std::size_t i : rec.steering) {
      if (!covered[i]) {
        covered[i] = 1;
        ++count;
      }
    }
    if (count == n_blocks) {
      ms.indices.push_back(r);
      current = r;
      std::fill(covered.begin(), covered.end(), 0);
      count = 0;
    }
  }
  ms.complete = ms.indices.back() == records.size();
  return ms;
}

}  // namespace detail

// Single pass. j_{k+1} is the first j at which the steering sets S_r with
// j_k <= l(r), r <= j, cover every block.
inline MacroIterationSequence macro_iterations(const Trace& t) {
  return detail::macro_iterations(t.records, t.n_blocks());
}

inline MacroIterationSequence macro_iterations(const Schedule& s) {
  return detail::macro_iterations(s.events, s.n_blocks);
}

// k_{m+1}: first k such that every machine updated at least twice in
// (k_m, k]. A machine updates at j when it owns a block of S_j.
inline EpochSequence epochs(const Trace& t, std::vector<std::size_t> owner_map = {}) {
  if (owner_map.empty()) {
    owner_map.resize(t.n_blocks());
    for (std::size_t i = 0; i < owner_map.size(); ++i) owner_map[i] = i;
  }
  if (owner_map.size() != t.n_blocks()) {
    throw InputError("epochs: owner_map must assign every block to a machine");
  }
  std::vector<std::size_t> machines = owner_map;
  std::sort(machines.begin(), machines.end());
  machines.erase(std::unique(machines.begin(), machines.end()), machines.end());
  std::vector<std::size_t> slot(owner_map.size());
  for (std::size_t i = 0; i < owner_map.size(); ++i) {
    slot[i] = static_cast<std::size_t>(
        std::lower_bound(machines.begin(), machines.end(), owner_map[i]) - machines.begin());
  }

  EpochSequence es;
  es.owner_map = owner_map;
  std::vector<std::size_t> updates(machines.size(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t k = 1; k <= t.horizon(); ++k) {
    touched.clear();
    for (std::size_t i : t.records[k - 1].steering) touched.push_back(slot[i]);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::size_t w : touched) ++updates[w];
    if (std::all_of(updates.begin(), updates.end(), [](std::size_t c) { return c >= 2; })) {
      es.indices.push_back(k);
      std::fill(updates.begin(), updates.end(), 0);
    }
  }
  return es;
}

// Every update at j >= j_{k+1} reads labels >= j_k.
inline VerificationReport check_freshness(const Trace& t, const MacroIterationSequence& ms) {
  VerificationReport rep;
  rep.name = "freshness";
  for (std::size_t j = 1; j <= t.horizon(); ++j) {
    const std::size_t k = ms.k_at(j);
    if (k < 1) continue;
    const double floor = static_cast<double>(ms.indices[k - 1]);
    const auto& labels = t.records[j - 1].labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      rep.record(j, i, floor, static_cast<double>(labels[i]));
    }
  }
  return rep;
}

// Updates inside the epoch (k_{m-1}, k_m] read l(j) >= k_{m-1-lag}.
inline VerificationReport check_epoch_labels(const Trace& t, const EpochSequence& es,
                                             std::size_t lag = 0) {
  VerificationReport rep;
  rep.name = "epoch_labels";
  for (std::size_t m = 1; m < es.indices.size(); ++m) {
    if (m < 1 + lag) continue;
    const double floor = static_cast<double>(es.indices[m - 1 - lag]);
    for (std::size_t j = es.indices[m - 1] + 1; j <= es.indices[m]; ++j) {
      rep.record(j, 0, floor, static_cast<double>(t.min_label(j)));
    }
  }
  return rep;
}

inline std::vector<Label> min_labels(const Trace& t) {
  std::vector<Label> out;
  out.reserve(t.horizon());
  for (std::size_t j = 1; j <= t.horizon(); ++j) out.push_back(t.min_label(j));
  return out;
}

inline bool labels_monotone(const Trace& t) {
  const auto l = min_labels(t);
  return std::is_sorted(l.begin(), l.end());
}

// |x~_i(j) - x*_i| / u_i <= |x(l(j)) - x*|_u for every exchanged block value.
inline VerificationReport verify_norm_constraint(const Trace& t, const Vector& z_star,
                                                 const NormSpec& ns, double tolerance = 1e-12) {
  ns.check(t.n_blocks());
  detail::require_dim(z_star, t.blocks.dim(), "verify_norm_constraint: z_star");
  VerificationReport rep;
  rep.name = "norm_constraint";
  rep.tolerance = tolerance;
  const auto xs = iterates(t);
  Vector stale(z_star.size());
  for (std::size_t j = 1; j <= t.horizon(); ++j) {
    const TraceRecord& rec = t.records[j - 1];
    if (rec.exchanged.size() != z_star.size()) {
      throw InputError("verify_norm_constraint: exchanged values missing at iteration " +
                       std::to_string(j));
    }
    for (std::size_t i = 0; i < t.n_blocks(); ++i) t.blocks.copy_block(xs[rec.labels[i]], stale, i);
    const double rhs = ns.umax(t.blocks, stale - z_star);
    const Vector dev = rec.exchanged - z_star;
    for (std::size_t i = 0; i < t.n_blocks(); ++i) rep.record(j, i, ns.block(t.blocks, dev, i), rhs);
  }
  return rep;
}

// max_i |x_i(j) - x*_i|^2 <= (1 - rho)^k max_i |x_i(0) - x*_i|^2 for j >= j_k.
// The contraction series holds e(j_k) / e(j_{k-1}) with e the squared residual.
inline VerificationReport verify_rate_bound(const Trace& t, const Vector& z_star,
                                            const MacroIterationSequence& ms, double rho,
                                            double tolerance = 1e-9) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InputError("verify_rate_bound: rho must lie in (0, 1]");
  detail::require_dim(z_star, t.blocks.dim(), "verify_rate_bound: z_star");
  if (!ms.complete && ms.count() < 2) {
    throw InsufficientDataError("verify_rate_bound: horizon ended after " +
                                std::to_string(ms.count()) + " macro-iteration(s)");
  }
  VerificationReport rep;
  rep.name = "rate_bound";
  rep.tolerance = tolerance;
  const NormSpec ns = NormSpec::unit(t.n_blocks());
  const auto xs = iterates(t);
  std::vector<double> err(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double e = ns.umax(t.blocks, xs[j] - z_star);
    err[j] = e * e;
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const std::size_t k = ms.k_at(j);
    rep.record(j, 0, err[j], std::pow(1.0 - rho, static_cast<double>(k)) * err[0]);
  }
  for (std::size_t k = 1; k < ms.indices.size(); ++k) {
    const double prev = err[ms.indices[k - 1]];
    rep.contraction_series.push_back(prev > 0.0 ? err[ms.indices[k]] / prev : 0.0);
  }
  return rep;
}

struct ResidualPoint {
  std::size_t j = 0;
  double umax = 0.0;
  double l2 = 0.0;
};

inline std::vector<ResidualPoint> residual_series(const Trace& t, const Vector& z_star,
                                                  const NormSpec& ns) {
  ns.check(t.n_blocks());
  detail::require_dim(z_star, t.blocks.dim(), "residual_series: z_star");
  std::vector<ResidualPoint> out;
  out.reserve(t.horizon() + 1);
  Vector x = t.x0;
  for (std::size_t j = 0; j <= t.horizon(); ++j) {
    if (j > 0) detail::apply_record(t.blocks, t.records[j - 1], x);
    const Vector d = x - z_star;
    out.push_back({j, ns.umax(t.blocks, d), d.norm()});
  }
  return out;
}

// Smallest k with (1 - rho)^k * r0 <= tol^2.
inline std::size_t stopping_index(double r0, double rho, double tol) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InputError("stopping_index: rho must lie in (0, 1]");
  if (!(r0 > 0.0)) throw InputError("stopping_index: R0 must be positive");
  if (!(tol > 0.0)) throw InputError("stopping_index: tol must be positive");
  const double target = tol * tol;
  if (r0 <= target) return 0;
  if (rho == 1.0) return 1;
  const double q = 1.0 - rho;
  auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(target / r0) / std::log(q))));
  // Guard the log-ratio against rounding at exact powers.
  while (k > 1 && std::pow(q, static_cast<double>(k - 1)) * r0 <= target) --k;
  while (std::pow(q, static_cast<double>(k)) * r0 > target) ++k;
  return k;
}

}  // namespace asynciter
