#pragma once

// JSON and CSV forms of problems, schedules, traces and reports.
//
// Problem JSON:
//   {"smooth": {"kind": "quadratic", "A": [[..]..], "b": [..], "mu"?, "lipschitz"?}
//            | {"kind": "ridge_least_squares", "features": [[..]..], "targets": [..], "ridge": r},
//    "nonsmooth": {"kind": "zero"} | {"kind": "l1", "lambda": l}
//               | {"kind": "box", "lo": [..] | s, "hi": [..] | s},
//    "blocks"?: [[coords]..] | "n_blocks"?: k,
//    "gamma"?: step}
// or a preset: {"preset": "lasso_quadratic", "n_blocks"?: k, "seed"?: s}.
//
// Schedule JSON:
//   {"n_blocks": n, "delay_class": "...", "bound": b, "seed": s,
//    "events": [[[S_j blocks..], [l_0(j), .., l_{n-1}(j)]], ...]}

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <optional>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "asynciter/analysis.hpp"
#include "asynciter/engine.hpp"
#include "asynciter/errors.hpp"
#include "asynciter/instances.hpp"
#include "asynciter/problem.hpp"
#include "asynciter/schedule.hpp"

namespace asynciter::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "asynciter 0.1.0";

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Field access with path-qualified diagnostics.

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError("'" + (path.empty() ? "<root>" : path) + "' must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing field '" + join(path, key) + "'");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError("field '" + path + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t unsigned_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                 !v.is_number_unsigned())) {
    throw InputError("field '" + path + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError("field '" + path + "' must be a string");
  return v.get<std::string>();
}

inline Vector vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError("field '" + path + "' must be an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Index>(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

inline Matrix matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw InputError("field '" + path + "' must be a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) throw InputError("field '" + rp + "' has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) =
          number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

}  // namespace detail

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Problems

inline json problem_to_json(const ProblemInstance& p) {
  json j;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, QuadraticTerm>) {
          j["smooth"] = {{"kind", "quadratic"}, {"A", to_json(t.A)}, {"b", to_json(t.b)},
                         {"mu", p.mu()}, {"lipschitz", p.lipschitz()}};
        } else {
          j["smooth"] = {{"kind", "ridge_least_squares"},
                         {"features", to_json(t.data.features)},
                         {"targets", to_json(t.data.targets)},
                         {"ridge", t.ridge}};
        }
      },
      p.f().term());
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ZeroPenalty>) {
          j["nonsmooth"] = {{"kind", "zero"}};
        } else if constexpr (std::is_same_v<T, L1Penalty>) {
          j["nonsmooth"] = {{"kind", "l1"}, {"lambda", t.lambda}};
        } else {
          j["nonsmooth"] = {{"kind", "box"}, {"lo", to_json(t.lo)}, {"hi", to_json(t.hi)}};
        }
      },
      p.g().term());
  json blocks = json::array();
  for (const auto& b : p.blocks().blocks()) blocks.push_back(b);
  j["blocks"] = std::move(blocks);
  j["gamma"] = p.gamma();
  return j;
}

inline ProblemInstance problem_from_json(const json& j, const std::string& path = "problem") {
  using namespace detail;
  if (!j.is_object()) throw InputError("'" + path + "' must be an object");

  if (j.contains("preset")) {
    const std::string name = string(j["preset"], join(path, "preset"));
    auto opt = [&](const char* key, std::uint64_t fallback) {
      return j.contains(key) ? unsigned_int(j[key], join(path, key)) : fallback;
    };
    if (name == "scalar_quadratic") return instances::scalar_quadratic();
    if (name == "lasso_quadratic") return instances::lasso_quadratic(opt("n_blocks", 2), opt("seed", 11));
    if (name == "box_quadratic") return instances::box_quadratic(opt("n_blocks", 5), opt("seed", 50));
    if (name == "elastic_net") return instances::elastic_net(opt("n_blocks", 2), opt("seed", 7));
    throw InputError("field '" + join(path, "preset") + "': unknown preset '" + name + "'");
  }

  const json& sj = field(j, "smooth", path);
  const std::string sp = join(path, "smooth");
  const std::string skind = string(field(sj, "kind", sp), join(sp, "kind"));
  std::optional<SmoothPart> f;
  if (skind == "quadratic") {
    Matrix a = matrix(field(sj, "A", sp), join(sp, "A"));
    Vector b = vector(field(sj, "b", sp), join(sp, "b"));
    if (sj.contains("mu") || sj.contains("lipschitz")) {
      const double mu = number(field(sj, "mu", sp), join(sp, "mu"));
      const double lip = number(field(sj, "lipschitz", sp), join(sp, "lipschitz"));
      f = SmoothPart::quadratic(std::move(a), std::move(b), mu, lip);
    } else {
      f = SmoothPart::quadratic(std::move(a), std::move(b));
    }
  } else if (skind == "ridge_least_squares") {
    Matrix y = matrix(field(sj, "features", sp), join(sp, "features"));
    Vector z = vector(field(sj, "targets", sp), join(sp, "targets"));
    const double ridge = number(field(sj, "ridge", sp), join(sp, "ridge"));
    f = SmoothPart::ridge_least_squares(Dataset(std::move(y), std::move(z)), ridge);
  } else {
    throw InputError("field '" + join(sp, "kind") + "': unknown smooth kind '" + skind + "'");
  }
  const Index n = f->dim();

  NonsmoothPart g;
  if (j.contains("nonsmooth")) {
    const json& gj = j["nonsmooth"];
    const std::string gp = join(path, "nonsmooth");
    const std::string gkind = string(field(gj, "kind", gp), join(gp, "kind"));
    if (gkind == "zero") {
      g = NonsmoothPart::zero();
    } else if (gkind == "l1") {
      g = NonsmoothPart::l1(number(field(gj, "lambda", gp), join(gp, "lambda")));
    } else if (gkind == "box") {
      auto bound = [&](const char* key) {
        const json& v = field(gj, key, gp);
        return v.is_number() ? Vector(Vector::Constant(n, v.get<double>()))
                             : vector(v, join(gp, key));
      };
      g = NonsmoothPart::box(bound("lo"), bound("hi"));
    } else {
      throw InputError("field '" + join(gp, "kind") + "': unknown nonsmooth kind '" + gkind + "'");
    }
  }

  BlockPartition blocks = BlockPartition::contiguous(n, 1);
  if (j.contains("blocks")) {
    const json& bj = j["blocks"];
    if (!bj.is_array()) throw InputError("field '" + join(path, "blocks") + "' must be an array");
    std::vector<std::vector<Index>> bl;
    for (std::size_t b = 0; b < bj.size(); ++b) {
      const std::string bp = join(path, "blocks") + "[" + std::to_string(b) + "]";
      if (!bj[b].is_array()) throw InputError("field '" + bp + "' must be an array");
      std::vector<Index> coords;
      for (const auto& c : bj[b]) coords.push_back(static_cast<Index>(unsigned_int(c, bp)));
      bl.push_back(std::move(coords));
    }
    blocks = BlockPartition(std::move(bl), n);
  } else if (j.contains("n_blocks")) {
    blocks = BlockPartition::contiguous(n, unsigned_int(j["n_blocks"], join(path, "n_blocks")));
  }

  std::optional<double> gamma;
  if (j.contains("gamma")) gamma = number(j["gamma"], join(path, "gamma"));
  return ProblemInstance(std::move(*f), std::move(g), std::move(blocks), gamma);
}

// ---------------------------------------------------------------------------
// Schedules

inline json schedule_to_json(const Schedule& s) {
  json events = json::array();
  for (const auto& e : s.events) events.push_back(json::array({e.steering, e.labels}));
  return {{"n_blocks", s.n_blocks},
          {"delay_class", std::string(to_string(s.delay_class))},
          {"bound", s.bound},
          {"seed", s.seed},
          {"events", std::move(events)}};
}

inline Schedule schedule_from_json(const json& j, const std::string& path = "schedule") {
  using namespace detail;
  Schedule s;
  s.n_blocks = unsigned_int(field(j, "n_blocks", path), join(path, "n_blocks"));
  if (j.contains("delay_class")) {
    s.delay_class = delay_class_from_string(string(j["delay_class"], join(path, "delay_class")));
  }
  if (j.contains("bound")) s.bound = unsigned_int(j["bound"], join(path, "bound"));
  if (j.contains("seed")) s.seed = unsigned_int(j["seed"], join(path, "seed"));
  const json& ev = field(j, "events", path);
  if (!ev.is_array()) throw InputError("field '" + join(path, "events") + "' must be an array");
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const std::string ep = join(path, "events") + "[" + std::to_string(k) + "]";
    if (!ev[k].is_array() || ev[k].size() != 2 || !ev[k][0].is_array() || !ev[k][1].is_array()) {
      throw InputError("field '" + ep + "' must be [[S_j blocks], [labels]]");
    }
    Event e;
    for (const auto& b : ev[k][0]) e.steering.push_back(unsigned_int(b, ep + "[0]"));
    for (const auto& l : ev[k][1]) e.labels.push_back(unsigned_int(l, ep + "[1]"));
    std::sort(e.steering.begin(), e.steering.end());
    s.events.push_back(std::move(e));
  }
  return s;
}

// Block i is character i of the mask.
inline std::string steering_mask(const std::vector<std::size_t>& steering, std::size_t n_blocks) {
  std::string mask(n_blocks, '0');
  for (std::size_t i : steering) {
    if (i < n_blocks) mask[i] = '1';
  }
  return mask;
}

inline std::string schedule_to_csv(const Schedule& s) {
  std::ostringstream out;
  out << "j,mask";
  for (std::size_t i = 0; i < s.n_blocks; ++i) out << ",l_" << i;
  out << '\n';
  for (std::size_t j = 1; j <= s.horizon(); ++j) {
    const Event& e = s.events[j - 1];
    out << j << ',' << steering_mask(e.steering, s.n_blocks);
    for (Label l : e.labels) out << ',' << l;
    out << '\n';
  }
  return out.str();
}

inline json validation_to_json(const ValidationReport& r) {
  auto pair_or_null = [](const auto& opt) -> json {
    if (!opt) return nullptr;
    return {{"block", opt->first}, {"j", opt->second}};
  };
  json j;
  j["overall"] = r.overall;
  j["failures"] = r.failures();
  j["structure"] = {{"pass", r.structure.pass}, {"detail", r.structure.detail}};
  j["condition_a"] = {{"pass", r.condition_a.pass},
                      {"first_violation", pair_or_null(r.condition_a.first_violation)}};
  j["condition_b_finite"] = {{"pass", r.condition_b_finite.pass},
                             {"applicable", r.condition_b_finite.applicable},
                             {"failing_block", r.condition_b_finite.failing_block
                                                   ? json(*r.condition_b_finite.failing_block)
                                                   : json(nullptr)},
                             {"head_max", r.condition_b_finite.head_max},
                             {"tail_min", r.condition_b_finite.tail_min}};
  j["condition_c"] = {{"pass", r.condition_c.pass},
                      {"window", r.condition_c.window},
                      {"starved_block", r.condition_c.starved_block
                                            ? json(*r.condition_c.starved_block)
                                            : json(nullptr)},
                      {"last_update", r.condition_c.last_update}};
  j["condition_d"] = {{"applicable", r.condition_d.applicable},
                      {"pass", r.condition_d.pass},
                      {"witnessed_bound", r.condition_d.witnessed_bound},
                      {"first_violation", pair_or_null(r.condition_d.first_violation)}};
  return j;
}

// ---------------------------------------------------------------------------
// Reports and traces

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json report_to_json(const VerificationReport& r, std::size_t max_violations = 20) {
  json viol = json::array();
  for (std::size_t k = 0; k < r.violations.size() && k < max_violations; ++k) {
    const auto& v = r.violations[k];
    viol.push_back({{"j", v.j}, {"block", v.block}, {"lhs", finite_or_null(v.lhs)},
                    {"rhs", finite_or_null(v.rhs)}});
  }
  json j = {{"name", r.name},
            {"pass", r.pass},
            {"checked", r.checked},
            {"violation_count", r.violations.size()},
            {"violations", std::move(viol)},
            {"worst_slack", finite_or_null(r.worst_slack)},
            {"tolerance", r.tolerance}};
  if (!r.contraction_series.empty()) j["contraction_series"] = r.contraction_series;
  return j;
}

// Columns (j, k, residual_umax, residual_l2, bound_rhs, macro_boundary_flag).
// bound_rhs is sqrt((1 - rho)^k) * |x(0) - x*|_u, in the units of residual_umax.
inline std::string residual_csv(const std::vector<ResidualPoint>& series,
                                const MacroIterationSequence& ms, double rho) {
  std::ostringstream out;
  out << "j,k,residual_umax,residual_l2,bound_rhs,macro_boundary_flag\n";
  const double r0 = series.empty() ? 0.0 : series.front().umax;
  for (const auto& p : series) {
    const std::size_t k = ms.k_at(p.j);
    const double rhs = std::sqrt(std::pow(1.0 - rho, static_cast<double>(k))) * r0;
    const bool boundary = ms.indices[k] == p.j;
    out << p.j << ',' << k << ',' << format_double(p.umax) << ',' << format_double(p.l2) << ','
        << format_double(rhs) << ',' << (boundary ? 1 : 0) << '\n';
  }
  return out.str();
}

// One row per iteration: (j, updated-block mask, labels, residual). The
// residual column is left empty when no residual series is supplied.
inline std::string trace_to_csv(const Trace& t, const std::vector<ResidualPoint>* residuals = nullptr) {
  std::ostringstream out;
  out << "j,mask";
  for (std::size_t i = 0; i < t.n_blocks(); ++i) out << ",l_" << i;
  out << ",residual_umax\n";
  for (std::size_t j = 1; j <= t.horizon(); ++j) {
    const auto& rec = t.records[j - 1];
    out << j << ',' << steering_mask(rec.steering, t.n_blocks());
    for (Label l : rec.labels) out << ',' << l;
    out << ',';
    if (residuals) out << format_double((*residuals)[j].umax);
    out << '\n';
  }
  return out.str();
}

// Sidecar for flexible runs: the exchanged vector v(j) of every iteration.
inline json trace_exchanged_json(const Trace& t) {
  json rows = json::array();
  for (std::size_t j = 1; j <= t.horizon(); ++j) {
    rows.push_back({{"j", j}, {"exchanged", to_json(t.records[j - 1].exchanged)}});
  }
  return {{"policy", t.policy.name()},
          {"theta", t.policy.theta},
          {"steps", t.policy.steps},
          {"seed", t.seed},
          {"records", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace asynciter::io
