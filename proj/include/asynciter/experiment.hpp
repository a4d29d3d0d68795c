#pragma once

// File-driven experiment runner. Config layout (JSON, see schemas/config.schema.json):
//
//   {"problem": {...} | "problem_file": "p.json",
//    "operator": {"gamma"?: s, "inner_steps"?: m},
//    "schedule": {"kind": "bounded", "horizon": J, "seeds": [..], "params"?: {...}}
//              | {"file": "s.json", "seeds"?: [..]},
//    "policy"?: {"kind": "exact" | "interpolate" | "inner_snapshot", "theta"?, "steps"?},
//    "x0"?: [..] | {"scale": s},
//    "norm_weights"?: [..], "owner_map"?: [..],
//    "verify"?: {"rate_bound", "norm_constraint", "freshness", "epoch_labels"},
//    "reference_tolerance"?: 1e-12,
//    "output": "dir"}
//
// Relative paths resolve against the directory holding the config file.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asynciter/analysis.hpp"
#include "asynciter/engine.hpp"
#include "asynciter/errors.hpp"
#include "asynciter/io.hpp"
#include "asynciter/operator.hpp"
#include "asynciter/problem.hpp"
#include "asynciter/random.hpp"
#include "asynciter/schedule.hpp"

namespace asynciter {

namespace fs = std::filesystem;

enum ExitStatus : int { kExitPass = 0, kExitInput = 1, kExitFail = 2 };

struct VerifyToggles {
  bool rate_bound = true;
  bool norm_constraint = true;
  bool freshness = true;
  bool epoch_labels = false;
};

struct ExperimentConfig {
  std::optional<ProblemInstance> problem;
  std::size_t inner_steps = 1;

  std::optional<Schedule> schedule_file;  // when set, used as is for every seed
  ScheduleKind kind = ScheduleKind::bounded;
  ScheduleParams params;
  std::size_t horizon = 0;
  std::vector<std::uint64_t> seeds;

  FlexiblePolicy policy;
  std::optional<Vector> x0;
  double x0_scale = 1.0;
  std::vector<double> norm_weights;
  std::vector<std::size_t> owner_map;
  VerifyToggles verify;
  double reference_tolerance = 1e-12;
  fs::path output;
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline bool flag(const io::json& obj, const char* key, bool fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw InputError("field '" + path + "." + key + "' must be a boolean");
  return obj[key].get<bool>();
}

}  // namespace detail

// `base` is the directory relative paths resolve against.
inline ExperimentConfig config_from_json(const io::json& j, const fs::path& base) {
  using namespace io::detail;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  ExperimentConfig cfg;

  if (j.contains("problem")) {
    cfg.problem = io::problem_from_json(j["problem"], "problem");
  } else if (j.contains("problem_file")) {
    const fs::path p = asynciter::detail::resolve(base, string(j["problem_file"], "problem_file"));
    if (!fs::exists(p)) throw InputError("field 'problem_file': '" + p.string() + "' does not exist");
    cfg.problem = io::problem_from_json(io::read_json_file(p.string()), "problem_file");
  } else {
    throw InputError("missing field 'problem' (or 'problem_file')");
  }

  std::optional<double> gamma;
  if (j.contains("operator")) {
    const io::json& oj = j["operator"];
    if (!oj.is_object()) throw InputError("field 'operator' must be an object");
    if (oj.contains("gamma")) gamma = number(oj["gamma"], "operator.gamma");
    if (oj.contains("inner_steps")) {
      cfg.inner_steps = unsigned_int(oj["inner_steps"], "operator.inner_steps");
      if (cfg.inner_steps < 1) throw InputError("field 'operator.inner_steps' must be >= 1");
    }
  }
  if (gamma) cfg.problem = cfg.problem->with_gamma(*gamma);

  const io::json& sj = field(j, "schedule", "");
  if (sj.contains("file")) {
    const fs::path p = asynciter::detail::resolve(base, string(sj["file"], "schedule.file"));
    if (!fs::exists(p)) throw InputError("field 'schedule.file': '" + p.string() + "' does not exist");
    cfg.schedule_file = io::schedule_from_json(io::read_json_file(p.string()), "schedule.file");
    cfg.horizon = cfg.schedule_file->horizon();
    cfg.seeds = {cfg.schedule_file->seed};
  } else {
    cfg.kind = schedule_kind_from_string(string(field(sj, "kind", "schedule"), "schedule.kind"));
    cfg.horizon = unsigned_int(field(sj, "horizon", "schedule"), "schedule.horizon");
    if (sj.contains("params")) {
      const io::json& pj = sj["params"];
      if (!pj.is_object()) throw InputError("field 'schedule.params' must be an object");
      if (pj.contains("bound")) cfg.params.bound = unsigned_int(pj["bound"], "schedule.params.bound");
      if (pj.contains("update_probability")) {
        cfg.params.update_probability = number(pj["update_probability"], "schedule.params.update_probability");
      }
      if (pj.contains("growth")) cfg.params.growth = number(pj["growth"], "schedule.params.growth");
      if (pj.contains("reorder_rate")) {
        cfg.params.reorder_rate = number(pj["reorder_rate"], "schedule.params.reorder_rate");
      }
      if (pj.contains("reorder_depth")) {
        cfg.params.reorder_depth = unsigned_int(pj["reorder_depth"], "schedule.params.reorder_depth");
      }
    }
  }
  if (sj.contains("seeds")) {
    const io::json& seeds = sj["seeds"];
    if (!seeds.is_array()) throw InputError("field 'schedule.seeds' must be an array");
    cfg.seeds.clear();
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      cfg.seeds.push_back(unsigned_int(seeds[k], "schedule.seeds[" + std::to_string(k) + "]"));
    }
  }
  if (cfg.seeds.empty()) throw InputError("field 'schedule.seeds' must be a nonempty array");
  if (cfg.horizon < 1) throw InputError("field 'schedule.horizon' must be >= 1");

  if (j.contains("policy")) {
    const io::json& pj = j["policy"];
    const std::string kind = string(field(pj, "kind", "policy"), "policy.kind");
    if (kind == "exact") {
      cfg.policy = FlexiblePolicy::exact();
    } else if (kind == "interpolate") {
      cfg.policy = FlexiblePolicy::interpolate(number(field(pj, "theta", "policy"), "policy.theta"));
    } else if (kind == "inner_snapshot") {
      cfg.policy = FlexiblePolicy::inner_snapshot(unsigned_int(field(pj, "steps", "policy"), "policy.steps"));
    } else {
      throw InputError("field 'policy.kind': unknown policy '" + kind + "'");
    }
  }

  if (j.contains("x0")) {
    const io::json& xj = j["x0"];
    if (xj.is_array()) {
      cfg.x0 = vector(xj, "x0");
      if (cfg.x0->size() != cfg.problem->dim()) throw InputError("field 'x0' has the wrong length");
    } else {
      cfg.x0_scale = number(field(xj, "scale", "x0"), "x0.scale");
    }
  }
  if (j.contains("norm_weights")) {
    const Vector w = vector(j["norm_weights"], "norm_weights");
    cfg.norm_weights.assign(w.data(), w.data() + w.size());
  }
  if (j.contains("owner_map")) {
    const io::json& om = j["owner_map"];
    if (!om.is_array()) throw InputError("field 'owner_map' must be an array");
    for (std::size_t k = 0; k < om.size(); ++k) {
      cfg.owner_map.push_back(unsigned_int(om[k], "owner_map[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("verify")) {
    const io::json& vj = j["verify"];
    if (!vj.is_object()) throw InputError("field 'verify' must be an object");
    cfg.verify.rate_bound = asynciter::detail::flag(vj, "rate_bound", true, "verify");
    cfg.verify.norm_constraint = asynciter::detail::flag(vj, "norm_constraint", true, "verify");
    cfg.verify.freshness = asynciter::detail::flag(vj, "freshness", true, "verify");
    cfg.verify.epoch_labels = asynciter::detail::flag(vj, "epoch_labels", false, "verify");
  }
  if (j.contains("reference_tolerance")) {
    cfg.reference_tolerance = number(j["reference_tolerance"], "reference_tolerance");
  }
  cfg.output = asynciter::detail::resolve(base, string(field(j, "output", ""), "output"));

  const std::size_t nb = cfg.problem->blocks().size();
  if (!cfg.norm_weights.empty()) NormSpec{cfg.norm_weights}.check(nb);
  if (!cfg.owner_map.empty() && cfg.owner_map.size() != nb) {
    throw InputError("field 'owner_map' needs one entry per block");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  const fs::path p(path);
  return config_from_json(io::read_json_file(path), p.has_parent_path() ? p.parent_path() : fs::path("."));
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool pass = true;
  io::json summary;
};

inline Vector initial_point(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.x0) return *cfg.x0;
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  return rng.normal_vector(cfg.problem->dim(), cfg.x0_scale);
}

inline Schedule schedule_for_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.schedule_file) return *cfg.schedule_file;
  return generate(cfg.kind, cfg.problem->blocks().size(), cfg.horizon, cfg.params, seed);
}

// Runs one seed and writes its artifacts under `dir`.
inline SeedOutcome run_seed(const ExperimentConfig& cfg, const GradientTypeOperator& op,
                            const FixedPoint& ref, std::uint64_t seed, const fs::path& dir) {
  SeedOutcome out;
  out.seed = seed;
  io::json& js = out.summary;
  js["seed"] = seed;
  js["failures"] = io::json::array();
  auto fail = [&](const std::string& what) {
    out.pass = false;
    js["failures"].push_back(what);
  };

  fs::create_directories(dir);
  const Schedule s = schedule_for_seed(cfg, seed);
  io::write_text_file((dir / "schedule.csv").string(), io::schedule_to_csv(s));

  const ValidationReport vr = validate(s);
  js["validation"] = io::validation_to_json(vr);
  if (!vr.overall) {
    // The engine refuses invalid schedules; nothing further to verify.
    for (const auto& name : vr.failures()) fail(name);
    js["pass"] = false;
    return out;
  }

  Trace trace;
  try {
    trace = run(op, initial_point(cfg, seed), s, cfg.policy);
  } catch (const NumericError& e) {
    fail(std::string("engine: ") + e.what());
    js["pass"] = false;
    return out;
  }

  const NormSpec ns = cfg.norm_weights.empty() ? NormSpec::unit(s.n_blocks) : NormSpec{cfg.norm_weights};
  const MacroIterationSequence ms = macro_iterations(trace);
  const EpochSequence es = epochs(trace, cfg.owner_map);
  js["macro_iterations"] = ms.count();
  js["macro_complete"] = ms.complete;
  js["epochs"] = es.count();
  js["labels_monotone"] = labels_monotone(trace);

  io::json verifiers = io::json::object();
  auto record = [&](const VerificationReport& r) {
    verifiers[r.name] = io::report_to_json(r);
    if (!r.pass) fail(r.name);
  };
  if (cfg.verify.rate_bound) {
    try {
      record(verify_rate_bound(trace, ref.z_star, ms, op.rho()));
    } catch (const InsufficientDataError& e) {
      verifiers["rate_bound"] = {{"name", "rate_bound"}, {"pass", false}, {"error", e.what()}};
      fail("rate_bound");
    }
  }
  if (cfg.verify.norm_constraint) record(verify_norm_constraint(trace, ref.z_star, ns));
  if (cfg.verify.freshness) record(check_freshness(trace, ms));
  if (cfg.verify.epoch_labels) record(check_epoch_labels(trace, es));
  js["verifiers"] = std::move(verifiers);

  const auto series = residual_series(trace, ref.z_star, ns);
  js["final_residual_umax"] = series.back().umax;
  js["final_residual_l2"] = series.back().l2;

  std::string header = std::string("# ") + io::kToolVersion + "\n";
  io::write_text_file((dir / "residuals.csv").string(), header + io::residual_csv(series, ms, op.rho()));
  io::write_text_file((dir / "trace.csv").string(), io::trace_to_csv(trace, &series));
  if (cfg.policy.flexible()) {
    io::write_text_file((dir / "exchanged.json").string(), io::trace_exchanged_json(trace).dump(1) + "\n");
  }
  js["pass"] = out.pass;
  return out;
}

// Concurrent seeds capped by ASYNCITER_THREADS (default 1).
inline std::size_t thread_cap() {
  const char* env = std::getenv("ASYNCITER_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) throw InputError("ASYNCITER_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

struct ExperimentResult {
  int exit_status = kExitPass;
  io::json summary;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.problem) throw InputError("config has no problem");
  if (cfg.seeds.empty()) throw InputError("field 'schedule.seeds' must be a nonempty array");

  const GradientTypeOperator op(*cfg.problem, cfg.inner_steps);
  const FixedPoint ref = reference_fixed_point(*cfg.problem, cfg.reference_tolerance);
  fs::create_directories(cfg.output);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
      try {
        outcomes[k] = run_seed(cfg, op, ref, cfg.seeds[k], cfg.output / ("seed_" + std::to_string(cfg.seeds[k])));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(thread_cap(), cfg.seeds.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult res;
  io::json& sum = res.summary;
  sum["tool"] = io::kToolVersion;
  sum["problem"] = {{"dim", cfg.problem->dim()},
                    {"n_blocks", cfg.problem->blocks().size()},
                    {"gamma", cfg.problem->gamma()},
                    {"mu", cfg.problem->mu()},
                    {"lipschitz", cfg.problem->lipschitz()}};
  sum["operator"] = {{"inner_steps", op.inner_steps()},
                     {"rho", op.rho()},
                     {"contraction_bound", op.contraction_bound()},
                     {"block_contraction_bound", op.block_contraction_bound()}};
  sum["reference"] = {{"residual", ref.residual},
                      {"iterations", ref.iterations},
                      {"optimality_violation", optimality_violation(*cfg.problem, ref.y_star)}};
  sum["schedule"] = {{"source", cfg.schedule_file ? "file" : "generated"},
                     {"kind", cfg.schedule_file ? std::string(to_string(cfg.schedule_file->delay_class))
                                                : std::string(to_string(cfg.kind))},
                     {"horizon", cfg.horizon}};
  sum["policy"] = cfg.policy.name();
  sum["seeds"] = io::json::array();
  sum["failures"] = io::json::array();
  bool pass = true;
  for (auto& o : outcomes) {
    pass = pass && o.pass;
    for (const auto& f : o.summary["failures"]) {
      sum["failures"].push_back("seed " + std::to_string(o.seed) + ": " + f.get<std::string>());
    }
    sum["seeds"].push_back(std::move(o.summary));
  }
  sum["pass"] = pass;
  res.exit_status = pass ? kExitPass : kExitFail;
  sum["exit_status"] = res.exit_status;
  io::write_text_file((cfg.output / "summary.json").string(), sum.dump(2) + "\n");
  return res;
}

}  // namespace asynciter
