// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varioeta/varioeta.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Flat key=value lines; '#' starts a comment. Keys are long option names
// without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError{"cannot read config file '" + path + "'"};
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError{path + ":" + std::to_string(number) + ": expected key=value"};
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Turns config entries into extra command-line tokens. Command-line flags
// win: a key already given there is skipped.
std::vector<std::string> config_tokens(const std::vector<std::string>& args, CLI::App& app, CLI::App* active) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  std::vector<std::string> tokens;
  if (!path) return tokens;
  for (const auto& [key, value] : read_config(*path)) {
    const std::string flag = "--" + key;
    if (key == "config" || given_on_command_line(args, flag)) continue;
    const CLI::Option* option = active != nullptr ? active->get_option_no_throw(flag) : nullptr;
    if (option == nullptr) option = app.get_option_no_throw(flag);
    if (option == nullptr) throw UsageError{"config key '" + key + "' is not an option of this command"};
    if (option->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") tokens.push_back(flag);
      continue;
    }
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = value.find(',', start);
      const std::string item = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!item.empty()) {
        tokens.push_back(flag);
        tokens.push_back(item);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return tokens;
}

int exit_code_for(ve_status status) {
  if (status == VE_OK) return kExitOk;
  return status == VE_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
}

int report_error(ve_status status) {
  std::cerr << "error: " << ve_status_string(status) << ": " << ve_last_error() << "\n";
  return exit_code_for(status);
}

// Writes the report's CSV to --out (or stdout) and its warnings to stderr.
int emit(ve_report* report, const std::string& out_path, bool print_summary) {
  for (std::size_t i = 0; i < ve_report_warning_count(report); ++i) {
    std::cerr << "warning: " << ve_report_warning(report, i) << "\n";
  }
  if (print_summary) std::cerr << ve_report_summary(report);
  int code = kExitOk;
  if (out_path.empty()) {
    std::fputs(ve_report_csv(report), stdout);
  } else if (const ve_status s = ve_report_write_csv(report, out_path.c_str()); s != VE_OK) {
    code = report_error(s);
  }
  if (code == kExitOk && !ve_report_passed(report)) code = kExitFailure;
  ve_report_destroy(report);
  return code;
}

ve_problem parse_problem(const std::string& name) {
  if (name == "quadratic") return VE_PROBLEM_QUADRATIC;
  if (name == "rosenbrock") return VE_PROBLEM_ROSENBROCK;
  if (name == "least-squares" || name == "least_squares") return VE_PROBLEM_LEAST_SQUARES;
  throw UsageError{"unknown problem '" + name + "' (quadratic, rosenbrock, least-squares)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vario-eta optimizer experiments and asymptotic-variance checks", "varioeta"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 42;
  std::string out_path;
  std::uint64_t trials = 100000;
  std::string config_path;
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out_path, "CSV output path (default: stdout)");
  app.add_option("--trials", trials, "Monte Carlo trials per grid point (fig2)");
  app.add_option("--config", config_path, "key=value file; command-line flags override it");

  // fig2
  auto* fig2 = app.add_subcommand("fig2", "Variance of averaged uniforms versus the asymptotic law");
  std::vector<std::uint64_t> n_values;
  unsigned threads = 0;
  fig2->add_option("--n", n_values, "Dataset size n (repeatable; default grid when absent)");
  fig2->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");

  // shared optimizer settings
  ve_method_config base;
  ve_method_config_default(&base);
  ve_problem_spec problem;
  ve_problem_spec_default(&problem);
  std::string problem_name = "quadratic";
  std::uint64_t steps = 1000;
  bool no_timing = false;
  const auto add_optimizer_options = [&](CLI::App* sub) {
    sub->add_option("--problem", problem_name, "quadratic | rosenbrock | least-squares");
    sub->add_option("--dim", problem.dim, "Problem dimension");
    sub->add_option("--dataset-size", problem.dataset_size, "Number of patterns M (0: automatic)");
    sub->add_option("--noise", problem.noise, "Pattern noise scale");
    sub->add_option("--data-seed", problem.data_seed, "Seed of the generated dataset");
    sub->add_option("--eta", base.eta, "Learning rate");
    sub->add_option("--phi", base.phi, "Stabilizer added to the standard deviation");
    sub->add_option("--batch", base.batch_size, "Batch size N");
    sub->add_option("--max-step", base.max_step, "Sup-norm cap on each update (<= 0: off)");
    sub->add_option("--steps", steps, "Optimization steps");
    sub->add_flag("--no-timing", no_timing, "Write timing columns as 0 for byte-stable output");
  };

  auto* bench = app.add_subcommand("bench", "Optimizer trajectories on a shared batch sequence");
  add_optimizer_options(bench);
  std::vector<std::string> methods;
  std::uint64_t record_every = 10;
  bench->add_option("--method", methods, "sgd | varioeta | varioeta-asymptotic | sgd-rescaled (repeatable)");
  bench->add_option("--record-every", record_every, "Record interval in steps");

  auto* compare = app.add_subcommand("compare", "Recursive versus asymptotic variance mode cost");
  add_optimizer_options(compare);
  unsigned repeats = 3;
  compare->add_option("--repeats", repeats, "Timing repeats (best is reported)");

  bool printed_exponent = false;
  ve_hankel_path path;
  ve_hankel_path_default(&path);
  auto* gamma = app.add_subcommand("gamma-check", "Reciprocal gamma by Hankel contour quadrature");
  gamma->add_flag("--printed-exponent", printed_exponent, "Integrate (-t)^(+s) instead of (-t)^(-s)");
  gamma->add_option("--truncation", path.truncation, "Leg length T");
  gamma->add_option("--axis-offset", path.axis_offset, "Leg offset from the real axis");
  gamma->add_option("--arc-nodes", path.arc_nodes, "Gauss-Legendre nodes on the arc");
  gamma->add_option("--leg-nodes", path.leg_nodes, "Gauss-Legendre nodes per leg");

  auto* gf = app.add_subcommand("gf-check", "Coefficient extraction and ODE residual checks");

  auto* validate = app.add_subcommand("validate", "Run every numerical check suite");
  validate->add_flag("--printed-exponent", printed_exponent, "Integrate (-t)^(+s) in the gamma checks");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  try {
    CLI::App* active = nullptr;
    for (const auto& a : args) {
      if (!a.empty() && a[0] != '-') {
        active = app.get_subcommand_no_throw(a);
        if (active != nullptr) break;
      }
    }
    std::vector<std::string> full = args;
    const auto extra = config_tokens(args, app, active);
    full.insert(full.end(), extra.begin(), extra.end());
    std::reverse(full.begin(), full.end());  // CLI11 consumes a reversed vector
    app.parse(full);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    ve_report* report = nullptr;
    ve_status status = VE_OK;

    if (fig2->parsed()) {
      for (auto n : n_values) {
        if (n < 2) throw UsageError{"--n must be >= 2 (got " + std::to_string(n) + ")"};
      }
      if (trials < 1000) throw UsageError{"--trials must be >= 1000"};
      ve_fig2_params params{n_values.data(), n_values.size(), trials, seed, threads};
      status = ve_fig2_run(&params, &report);
      if (status != VE_OK) return report_error(status);
      return emit(report, out_path, false);
    }

    if (bench->parsed() || compare->parsed()) {
      problem.kind = parse_problem(problem_name);
      if (problem.kind == VE_PROBLEM_ROSENBROCK) problem.dim = 2;
      if (bench->parsed()) {
        if (methods.empty()) methods = {"sgd", "varioeta"};
        std::vector<const char*> names;
        for (const auto& m : methods) names.push_back(m.c_str());
        ve_bench_params params{problem, names.data(), names.size(), base, steps, seed, record_every, no_timing ? 0 : 1};
        status = ve_bench_run(&params, &report);
      } else {
        ve_compare_params params{problem, base, steps, seed, repeats, no_timing ? 0 : 1};
        status = ve_compare_run(&params, &report);
      }
      if (status != VE_OK) return report_error(status);
      return emit(report, out_path, true);
    }

    if (gamma->parsed()) {
      status = ve_gamma_check(&path, printed_exponent ? 1 : 0, &report);
    } else if (gf->parsed()) {
      status = ve_gf_check(&report);
    } else if (validate->parsed()) {
      status = ve_validate(printed_exponent ? 1 : 0, &report);
    }
    if (status != VE_OK) return report_error(status);
    return emit(report, out_path, true);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  }
}
