#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgp/cli.hpp"
#include "kgp/error.hpp"
#include "kgp/io.hpp"

using nlohmann::json;
namespace cli = kgp::cli;

namespace {

template <class T>
void put(json& doc, const char* section, const char* key, const std::optional<T>& v) {
  if (v) doc[section][key] = *v;
}

int fail_before_run(const json& doc, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::filesystem::path dir = "kgp_out";
  if (doc.is_object() && doc.contains("output_dir") && doc["output_dir"].is_string()) {
    dir = doc["output_dir"].get<std::string>();
  }
  if (const char* env = std::getenv(cli::kOutputDirEnv); env && *env) dir = env;
  const json manifest = {{"tool", "kgp"},
                         {"config", doc},
                         {"a_star", nullptr},
                         {"outputs", json::array()},
                         {"exit_code", cli::kExitValidation},
                         {"error", message}};
  try {
    kgp::atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "warning: could not write manifest: " << e.what() << "\n";
  }
  return cli::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kirchhoff-Gross-Pitaevskii minimizers and blow-up asymptotics"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (KGP_OUTPUT_DIR takes precedence)");

  std::optional<int> grid_n;
  std::optional<double> grid_r, tol, a, a_ratio, b, p, b_from, b_to;
  std::optional<int> b_count;
  std::optional<std::string> frame, init, regime;
  std::optional<std::uint64_t> seed;
  bool no_potential = false, no_warm_start = false;
  std::string verify_mode;

  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-n", grid_n, "Number of radial nodes");
    sub->add_option("--grid-r", grid_r, "Truncation radius R");
  };

  auto* townes = app.add_subcommand("townes", "Shoot the Townes ground state and report a*");
  add_grid(townes);
  townes->add_option("--tol", tol, "Bisection tolerance on Q(0)");

  auto* minimize = app.add_subcommand("minimize", "Minimize the energy at one parameter point");
  add_grid(minimize);
  auto* opt_a = minimize->add_option("--a", a, "Interaction strength a");
  minimize->add_option("--a-over-astar", a_ratio, "Interaction strength as a/a*")->excludes(opt_a);
  minimize->add_option("--b", b, "Kirchhoff coefficient b >= 0");
  minimize->add_option("--p", p, "Potential exponent p in (0, 2)");
  minimize->add_option("--frame", frame, "auto, physical or blowup");
  minimize->add_option("--init", init, "q0 or gaussian");
  minimize->add_option("--tol", tol, "EL residual tolerance");
  minimize->add_flag("--no-potential", no_potential, "Drop the singular potential");

  auto* sweep = app.add_subcommand("sweep", "Sweep b towards 0 and extrapolate the scaled energy");
  add_grid(sweep);
  sweep->add_option("--regime", regime, "critical or supercritical");
  sweep->add_option("--a-over-astar", a_ratio, "a/a* (1 for critical)");
  sweep->add_option("--p", p, "Potential exponent p in (0, 2)");
  sweep->add_option("--b-from", b_from, "Largest b");
  sweep->add_option("--b-to", b_to, "Smallest b");
  sweep->add_option("--b-count", b_count, "Number of geometric b values");
  sweep->add_option("--tol", tol, "EL residual tolerance");
  sweep->add_flag("--no-warm-start", no_warm_start, "Start every point from the limit shape");

  auto* verify = app.add_subcommand("verify", "Closed-form limits and property checks");
  add_grid(verify);
  verify->add_option("mode", verify_mode, "all (default) or formulas")->check(CLI::IsMember({"all", "formulas"}));
  verify->add_option("--seed", seed, "Seed for random profiles");

  CLI11_PARSE(app, argc, argv);

  json doc = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      return fail_before_run(json(nullptr), std::string("<root>: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) return fail_before_run(doc, "<root>: expected an object");
  }
  if (const auto subs = app.get_subcommands(); !subs.empty()) doc["subcommand"] = subs.front()->get_name();
  if (out_dir) doc["output_dir"] = *out_dir;

  if (grid_n) doc["grid"]["n"] = *grid_n;
  put(doc, "grid", "r", grid_r);
  if (townes->parsed()) put(doc, "townes", "tol", tol);
  if (minimize->parsed() || sweep->parsed()) put(doc, "flow", "residual_tol", tol);
  if (a) {
    doc["params"]["a"] = *a;
    if (doc["params"].contains("a_over_astar")) doc["params"].erase("a_over_astar");
  }
  if (a_ratio) {
    doc["params"]["a_over_astar"] = *a_ratio;
    if (doc["params"].contains("a")) doc["params"].erase("a");
  }
  put(doc, "params", "b", b);
  put(doc, "params", "p", p);
  if (no_potential) doc["params"]["potential"] = false;
  put(doc, "minimize", "frame", frame);
  put(doc, "minimize", "init", init);
  put(doc, "sweep", "regime", regime);
  if (b_from || b_to || b_count) {
    doc["sweep"]["b_list"] = {{"from", b_from.value_or(1e-1)},
                              {"to", b_to.value_or(regime && *regime == "supercritical" ? 1e-5 : 1e-4)},
                              {"count", b_count.value_or(12)}};
  }
  if (no_warm_start) doc["sweep"]["warm_start"] = false;
  if (!verify_mode.empty()) doc["verify"]["mode"] = verify_mode;
  if (seed) doc["seed"] = *seed;

  cli::RunConfig config;
  try {
    config = cli::parse_config(doc);
  } catch (const kgp::ConfigError& e) {
    return fail_before_run(doc, e.what());
  }
  try {
    return cli::run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitFailure;
  }
}
