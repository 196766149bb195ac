#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgp/asymptotics.hpp"
#include "kgp/energy.hpp"
#include "kgp/minimizer.hpp"
#include "kgp/radial.hpp"

namespace kgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitNonconverged = 2;
inline constexpr int kExitValidation = 3;

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "KGP_OUTPUT_DIR";

enum class Subcommand { townes, minimize, sweep, verify };
enum class FrameChoice { automatic, physical, blowup };
enum class InitChoice { q0, gaussian };
enum class VerifyMode { all, formulas };

struct ParamsConfig {
  /// Exactly one of a, a_over_astar; a_over_astar = 1 when neither is given.
  std::optional<double> a;
  std::optional<double> a_over_astar;
  double b = 0.1;
  double p = 1.0;
  bool potential = true;

  bool operator==(const ParamsConfig&) const = default;
};

struct MinimizeConfig {
  FrameChoice frame = FrameChoice::automatic;
  InitChoice init = InitChoice::q0;

  bool operator==(const MinimizeConfig&) const = default;
};

struct TownesConfig {
  double tol = 1e-15;
  std::vector<double> moments{0.5, 1.0, 1.5};

  bool operator==(const TownesConfig&) const = default;
};

struct SweepConfig {
  Regime regime = Regime::critical;
  /// Materialized on parse (default list depends on the regime).
  std::vector<double> b_list;
  bool warm_start = true;
  std::vector<PointOverride> overrides;

  bool operator==(const SweepConfig&) const = default;
};

struct VerifyConfig {
  VerifyMode mode = VerifyMode::all;
  std::vector<double> p_list{0.5, 1.0, 1.5};
  std::vector<double> a_ratio_list{1.0, 1.5, 2.0};
  /// b values of the upper-bound closed-form cross-check.
  std::vector<double> b_list{1.0, 1e-2};
  int gn_samples = 1000;

  bool operator==(const VerifyConfig&) const = default;
};

struct Lemma4Config {
  /// Calibrated from the probe family when absent.
  std::optional<double> c_cal;
  std::vector<double> eps = lemma4_default_eps();

  bool operator==(const Lemma4Config&) const = default;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::townes;
  ParamsConfig params;
  GridSpec grid;
  FlowOptions flow;
  MinimizeConfig minimize;
  TownesConfig townes;
  SweepConfig sweep;
  VerifyConfig verify;
  Lemma4Config lemma4;
  std::string output_dir = "kgp_out";
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

std::string to_string(Subcommand s);

/// Validates and materializes defaults. Throws ConfigError(path, message).
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config(const std::string& text);

/// Full config with every default written out; parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// `output_dir`, unless KGP_OUTPUT_DIR is set.
std::filesystem::path resolve_output_dir(const RunConfig& config);

/// Runs the subcommand, writes its outputs and manifest.json; returns the exit code.
int run(const RunConfig& config, std::ostream& log);

}  // namespace kgp::cli
