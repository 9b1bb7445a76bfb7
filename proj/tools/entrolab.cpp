#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "entrolab/lab.hpp"
#include "entrolab/parallel.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw entrolab::ConfigError("cannot open " + path);
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entrolab: numerical certification of convex entropy decay"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::int64_t seed = -1;
  int jobs = 0;
  auto* run_cmd = app.add_subcommand("run", "run the verification suites of a config");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory override");
  run_cmd->add_option("--seed", seed, "seed override");
  run_cmd->add_option("--jobs", jobs, "worker count (ENTROLAB_JOBS overrides)");

  std::vector<std::string> report_paths;
  auto* compare_cmd = app.add_subcommand("compare", "tabulate constants across reports");
  compare_cmd->add_option("reports", report_paths, "report.json paths")->required();

  std::string constants_path;
  auto* constants_cmd =
      app.add_subcommand("constants", "print the model's certified constants");
  constants_cmd->add_option("config", constants_path, "experiment config (JSON)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      if (jobs > 0) entrolab::set_jobs(jobs);
      auto config = entrolab::parse_config(load_json(config_path));
      if (!out_dir.empty()) config.output_dir = out_dir;
      if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
      auto result = entrolab::run(config);
      for (const auto& [name, suite] : result.report["suites"].items())
        std::cout << name << ": " << suite["status"].get<std::string>() << "\n";
      std::cout << "report: " << config.output_dir << "/report.json\n";
      return result.exit_code;
    }
    if (compare_cmd->parsed()) {
      auto rows = entrolab::compare(report_paths);
      std::cout << entrolab::format_compare_table(rows);
      return 0;
    }
    if (constants_cmd->parsed()) {
      auto config = entrolab::parse_config(load_json(constants_path));
      auto zoo = entrolab::build_model(config.model);
      nlohmann::json out;
      out["name"] = zoo.name;
      out["family"] = zoo.family;
      out["states"] = zoo.gen.size();
      out["hypotheses_ok"] = zoo.kappa.hypotheses_ok;
      out["failed_hypothesis"] = zoo.kappa.failed_hypothesis;
      out["kappa"] = zoo.kappa.kappa;
      out["kappa_bar"] = zoo.kappa.kappa_bar;
      out["kappa_1"] = zoo.kappa.kappa_1;
      nlohmann::json alphas;
      for (double a : config.phi_list)
        alphas["alpha" + std::to_string(a)] = zoo.kappa.kappa_alpha(a);
      out["kappa_alpha"] = alphas;
      std::cout << out.dump(2) << "\n";
      return zoo.kappa.hypotheses_ok ? 0 : 2;
    }
  } catch (const entrolab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 64;
  } catch (const entrolab::SchemaMismatchError& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return 65;
  } catch (const entrolab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
