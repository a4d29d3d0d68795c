// asynciter: experiment runner and oracle front end.
//
//   asynciter run <config> [--seed-override S] [--output DIR] [--quiet]
//   asynciter validate <schedule.json>
//   asynciter oracle macro  [--traces 200] [--max-blocks 4] [--max-horizon 60] [--seed 1]
//   asynciter oracle prox   [--points 100] [--resolution 1e-4] [--seed 1]
//   asynciter oracle baudet [--horizon 10000]
//   asynciter report <dir>
//
// Exit status: 0 pass, 1 input error, 2 verification failure or oracle mismatch.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asynciter/crosscheck.hpp"
#include "asynciter/errors.hpp"
#include "asynciter/experiment.hpp"
#include "asynciter/io.hpp"
#include "asynciter/schedule.hpp"

namespace {

using namespace asynciter;

int cmd_run(const std::string& config, const std::optional<std::uint64_t>& seed,
            const std::string& output, bool quiet) {
  ExperimentConfig cfg = load_config(config);
  if (seed) cfg.seeds = {*seed};
  if (!output.empty()) cfg.output = output;
  const ExperimentResult res = run_experiment(cfg);
  if (!quiet) {
    for (const auto& s : res.summary["seeds"]) {
      std::cout << "seed " << s["seed"].get<std::uint64_t>() << ": "
                << (s["pass"].get<bool>() ? "pass" : "FAIL");
      if (s.contains("macro_iterations")) {
        std::cout << "  macro=" << s["macro_iterations"].get<std::size_t>()
                  << " epochs=" << s["epochs"].get<std::size_t>();
      }
      for (const auto& f : s["failures"]) std::cout << "  [" << f.get<std::string>() << ']';
      std::cout << '\n';
    }
    std::cout << (res.exit_status == kExitPass ? "PASS" : "FAIL") << "  summary: "
              << (cfg.output / "summary.json").string() << '\n';
  }
  return res.exit_status;
}

int cmd_validate(const std::string& path, bool quiet) {
  const Schedule s = io::schedule_from_json(io::read_json_file(path), "schedule");
  const ValidationReport r = validate(s);
  if (!quiet) std::cout << io::validation_to_json(r).dump(2) << '\n';
  std::cout << (r.overall ? "VALID" : "INVALID");
  for (const auto& f : r.failures()) std::cout << ' ' << f;
  std::cout << '\n';
  return r.overall ? kExitPass : kExitFail;
}

int cmd_report(const std::string& dir) {
  const io::json sum = io::read_json_file((std::filesystem::path(dir) / "summary.json").string());
  if (!sum.contains("seeds") || !sum.contains("pass")) throw InputError("summary.json lacks 'seeds' or 'pass'");
  std::cout << sum.value("tool", std::string("?")) << "  policy=" << sum.value("policy", std::string("?"))
            << "  seeds=" << sum["seeds"].size() << '\n';
  std::cout << "seed       pass  macro  epochs  rate_slack     norm_slack\n";
  for (const auto& s : sum["seeds"]) {
    auto slack = [&](const char* name) -> std::string {
      if (!s.contains("verifiers") || !s["verifiers"].contains(name)) return "-";
      const auto& v = s["verifiers"][name];
      if (!v.contains("worst_slack") || v["worst_slack"].is_null()) return "-";
      return io::format_double(v["worst_slack"].get<double>());
    };
    std::string seed = std::to_string(s["seed"].get<std::uint64_t>());
    std::string macro = s.contains("macro_iterations") ? std::to_string(s["macro_iterations"].get<std::size_t>()) : "-";
    std::string ep = s.contains("epochs") ? std::to_string(s["epochs"].get<std::size_t>()) : "-";
    std::cout << seed << std::string(seed.size() < 11 ? 11 - seed.size() : 1, ' ')
              << (s["pass"].get<bool>() ? "yes   " : "NO    ") << macro
              << std::string(macro.size() < 7 ? 7 - macro.size() : 1, ' ') << ep
              << std::string(ep.size() < 8 ? 8 - ep.size() : 1, ' ') << slack("rate_bound")
              << "  " << slack("norm_constraint") << '\n';
  }
  for (const auto& f : sum.value("failures", io::json::array())) std::cout << "failure: " << f.get<std::string>() << '\n';
  const bool pass = sum["pass"].get<bool>();
  std::cout << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitPass : kExitFail;
}

int print_result(const crosscheck::Result& r, const std::string& extra = {}) {
  std::cout << r.line() << extra << '\n';
  return r.ok() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous block iteration simulator and verifier"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Only print the final status line");

  std::string config;
  std::optional<std::uint64_t> seed_override;
  std::string output;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config, "Config JSON")->required();
  run->add_option("--seed-override", seed_override, "Replace the seed list with one seed");
  run->add_option("--output", output, "Output directory (overrides the config)");
  run->add_flag("--quiet,-q", quiet, "Only print the final status line");

  std::string schedule;
  auto* val = app.add_subcommand("validate", "Check a schedule file against conditions a) to d)");
  val->add_option("schedule", schedule, "Schedule JSON")->required();
  val->add_flag("--quiet,-q", quiet, "Only print the verdict");

  auto* orc = app.add_subcommand("oracle", "Compare against brute-force oracles");
  orc->require_subcommand(1);
  std::size_t traces = 200;
  std::size_t max_blocks = 4;
  std::size_t max_horizon = 60;
  std::size_t points = 100;
  double resolution = 1e-4;
  std::size_t horizon = 10000;
  std::uint64_t seed = 1;
  auto* om = orc->add_subcommand("macro", "Macro-iteration tracker vs definition");
  om->add_option("--traces", traces);
  om->add_option("--max-blocks", max_blocks);
  om->add_option("--max-horizon", max_horizon);
  om->add_option("--seed", seed);
  auto* op = orc->add_subcommand("prox", "Closed-form prox vs grid argmin");
  op->add_option("--points", points);
  op->add_option("--resolution", resolution);
  op->add_option("--seed", seed);
  auto* ob = orc->add_subcommand("baudet", "Two-processor schedule vs event replay");
  ob->add_option("--horizon", horizon);

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Summarize a finished run directory");
  rep->add_option("dir", report_dir, "Output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(config, seed_override, output, quiet);
    if (*val) return cmd_validate(schedule, quiet);
    if (*rep) return cmd_report(report_dir);
    if (*om) return print_result(crosscheck::macro(traces, max_blocks, max_horizon, seed));
    if (*op) {
      const auto r = crosscheck::prox(points, resolution, seed);
      return print_result(r, "  max_deviation=" + io::format_double(r.max_deviation));
    }
    if (*ob) return print_result(crosscheck::baudet(horizon));
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DivergenceError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const io::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitInput;
}
