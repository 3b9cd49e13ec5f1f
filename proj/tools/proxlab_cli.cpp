// proxlab command line: run scenarios, list builtins, export report tables.

#include "proxlab/scenario.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
namespace sc = proxlab::scenario;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWitness = 1;
constexpr int kExitConfig = 2;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw sc::ConfigError(p.string(), "cannot read file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw sc::ConfigError("output", "cannot write '" + path + "'");
  out << text;
  if (!out) throw sc::ConfigError("output", "write failed for '" + path + "'");
}

sc::ScenarioConfig load(const std::string& what) {
  if (fs::is_regular_file(what)) return sc::parse_config_text(slurp(what));
  if (auto b = sc::find_builtin(what)) return *b;
  throw sc::ConfigError("scenario", "'" + what + "' is neither a readable file nor a builtin (see 'list')");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proxlab: distance functions, metric projections and Chebyshev sets in finite dimensions"};
  app.require_subcommand(1);

  std::string target, report_path, out_path, format = "csv", table;
  std::uint64_t seed = 0;
  double budget_scale = 1.0, tolerance = 0.0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run a scenario file or builtin and write the JSON report");
  run->add_option("scenario", target, "config path or builtin name")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--budget-scale", budget_scale, "multiply sampling budgets")->check(CLI::PositiveNumber);
  auto* tol_opt = run->add_option("--tolerance", tolerance, "override the solver tolerance")->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "report path (default: config 'output', else stdout)");
  run->add_flag("-q,--quiet", quiet, "no per-check summary on stderr");

  auto* list = app.add_subcommand("list", "list builtin scenarios");

  auto* show = app.add_subcommand("show", "print the configuration of a builtin");
  show->add_option("name", target, "builtin name")->required();

  auto* emit = app.add_subcommand("emit", "export a table from a report");
  emit->add_option("report", report_path, "report produced by 'run'")->required();
  emit->add_option("--format", format, "csv or json");
  emit->add_option("--table", table, "table name (default: first data table)");
  emit->add_option("--out", out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& b : sc::builtins()) std::cout << b.name << "\t" << b.description << "\n";
      return kExitOk;
    }
    if (*show) {
      auto cfg = sc::find_builtin(target);
      if (!cfg) throw sc::ConfigError("name", "unknown builtin '" + target + "'");
      std::cout << sc::to_json(*cfg).dump(2) << "\n";
      return kExitOk;
    }
    if (*emit) {
      sc::Json report;
      try {
        report = sc::Json::parse(slurp(report_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw sc::ConfigError(report_path, std::string("malformed report: ") + e.what());
      }
      std::string text;
      try {
        text = sc::emit_table(report, format, table);
      } catch (const proxlab::InvalidArgument& e) {
        throw sc::ConfigError("--format/--table", e.what());
      }
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, text);
      return kExitOk;
    }

    const auto cfg = load(target);
    sc::RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*tol_opt) opt.tolerance = tolerance;
    opt.budget_scale = budget_scale;
    const auto report = sc::run_scenario(cfg, opt);
    const std::string dest = out_path.empty() ? cfg.output : out_path;
    if (dest.empty())
      std::cout << report.dump(2) << "\n";
    else
      write_file(dest, report.dump(2) + "\n");

    if (!quiet) {
      for (const auto& c : report.at("checks"))
        std::cerr << c.at("check").get<std::string>() << ": " << c.at("status").get<std::string>() << "\n";
      std::cerr << "wall clock " << report.at("wall_clock_seconds").get<double>() << " s\n";
    }
    const auto& summary = report.at("summary");
    if (!summary.at("unexpected_witnesses").empty() || !summary.at("failed_checks").empty()) {
      std::cerr << "unexpected witnesses: " << summary.at("unexpected_witnesses").dump()
                << ", failed checks: " << summary.at("failed_checks").dump() << "\n";
      return kExitWitness;
    }
    return kExitOk;
  } catch (const sc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
