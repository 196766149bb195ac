#include "kgp/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include "kgp/error.hpp"
#include "kgp/io.hpp"
#include "kgp/townes.hpp"

namespace kgp::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// View of one JSON object that tracks consumed keys, so leftovers can be
// reported as unknown with their full path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, at(key));
  }
  void number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) out = as_number(*v, at(key));
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) out = as_integer<Int>(*v, at(key));
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected a boolean");
      out = v->get<bool>();
    }
  }
  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) out = as_numbers(*v, at(key));
  }
  std::optional<Section> section(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Section(*v, at(key));
  }

  void finish() const {
    for (const auto& item : j_->items()) {
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
  }

  static std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  template <class Int>
  static Int as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
      if (v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
      return static_cast<Int>(v.get<std::int64_t>());
    } else {
      const auto x = v.get<std::int64_t>();
      if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max()) {
        throw ConfigError(path, "integer out of range");
      }
      return static_cast<Int>(x);
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Enum>
Enum pick(const std::string& path, const std::string& value,
          std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(path, "unknown value '" + value + "' (expected one of " + names + ")");
}

const char* name_of(FrameChoice f) {
  switch (f) {
    case FrameChoice::automatic: return "auto";
    case FrameChoice::physical: return "physical";
    case FrameChoice::blowup: return "blowup";
  }
  return "";
}
const char* name_of(InitChoice i) { return i == InitChoice::q0 ? "q0" : "gaussian"; }
const char* name_of(VerifyMode m) { return m == VerifyMode::all ? "all" : "formulas"; }

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

void parse_params(Section s, ParamsConfig& p) {
  s.number("a", p.a);
  s.number("a_over_astar", p.a_over_astar);
  s.number("b", p.b);
  s.number("p", p.p);
  s.boolean("potential", p.potential);
  s.finish();
}

void parse_grid(Section s, GridSpec& g) {
  s.integer("n", g.n);
  s.number("r", g.radius);
  if (auto v = s.string("grading")) {
    g.grading = pick<Grading>(s.at("grading"), *v, {{"uniform", Grading::uniform}, {"sinh", Grading::sinh}});
  }
  s.number("core", g.core);
  s.finish();
}

void parse_flow(Section s, FlowOptions& f) {
  s.number("step", f.step);
  s.integer("max_iters", f.max_iters);
  s.number("energy_tol", f.energy_tol);
  s.integer("stall_window", f.stall_window);
  s.number("residual_tol", f.residual_tol);
  s.number("backtracking", f.backtracking);
  s.integer("max_halvings", f.max_halvings);
  s.number("growth", f.growth);
  s.number("max_step", f.max_step);
  s.number("truncation_tol", f.truncation_tol);
  s.finish();
}

void parse_sweep(Section s, SweepConfig& c) {
  if (auto v = s.string("regime")) {
    c.regime = pick<Regime>(s.at("regime"), *v,
                            {{"critical", Regime::critical}, {"supercritical", Regime::supercritical}});
  }
  if (const json* v = s.find("b_list")) {
    if (v->is_object()) {
      Section r(*v, s.at("b_list"));
      double from = 0.0, to = 0.0;
      std::size_t count = 0;
      r.number("from", from);
      r.number("to", to);
      r.integer("count", count);
      r.finish();
      require(from > 0.0 && to > 0.0 && from > to, s.at("b_list"), "need from > to > 0");
      require(count >= 2, s.at("b_list.count"), "need at least two points");
      c.b_list = geometric_b_list(from, to, count);
    } else {
      c.b_list = Section::as_numbers(*v, s.at("b_list"));
    }
  }
  s.boolean("warm_start", c.warm_start);
  if (const json* v = s.find("overrides")) {
    if (!v->is_array()) throw ConfigError(s.at("overrides"), "expected an array");
    c.overrides.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      Section o((*v)[i], s.at("overrides") + "[" + std::to_string(i) + "]");
      PointOverride po;
      o.integer("index", po.index);
      o.integer("max_iters", po.max_iters);
      o.finish();
      require(po.max_iters > 0, o.at("max_iters"), "must be positive");
      c.overrides.push_back(po);
    }
  }
  s.finish();
}

void parse_verify(Section s, VerifyConfig& c) {
  if (auto v = s.string("mode")) {
    c.mode = pick<VerifyMode>(s.at("mode"), *v, {{"all", VerifyMode::all}, {"formulas", VerifyMode::formulas}});
  }
  s.numbers("p_list", c.p_list);
  s.numbers("a_ratio_list", c.a_ratio_list);
  s.numbers("b_list", c.b_list);
  s.integer("gn_samples", c.gn_samples);
  s.finish();
}

void validate(RunConfig& c) {
  auto& p = c.params;
  require(!(p.a && p.a_over_astar), "params", "give either a or a_over_astar, not both");
  if (!p.a && !p.a_over_astar) p.a_over_astar = 1.0;
  if (p.a) require(*p.a > 0.0, "params.a", "must be positive");
  if (p.a_over_astar) require(*p.a_over_astar > 0.0, "params.a_over_astar", "must be positive");
  require(p.b >= 0.0, "params.b", "must be non-negative");
  require(p.p > 0.0 && p.p < 2.0, "params.p", "must lie in (0, 2)");
  if (p.b == 0.0 && p.a_over_astar && *p.a_over_astar >= 1.0 && c.subcommand == Subcommand::minimize) {
    throw ConfigError("params.b", "infimum not attained: b = 0 with a >= a*");
  }

  require(c.grid.n >= 16, "grid.n", "need at least 16 nodes");
  require(c.grid.radius > 0.0, "grid.r", "must be positive");
  require(c.grid.core > 0.0, "grid.core", "must be positive");

  const auto& f = c.flow;
  require(f.step > 0.0, "flow.step", "must be positive");
  require(f.max_iters > 0, "flow.max_iters", "must be positive");
  require(f.energy_tol > 0.0, "flow.energy_tol", "must be positive");
  require(f.stall_window > 0, "flow.stall_window", "must be positive");
  require(f.residual_tol > 0.0, "flow.residual_tol", "must be positive");
  require(f.backtracking > 0.0 && f.backtracking < 1.0, "flow.backtracking", "must lie in (0, 1)");
  require(f.max_halvings > 0, "flow.max_halvings", "must be positive");
  require(f.growth >= 1.0, "flow.growth", "must be at least 1");
  require(f.max_step >= f.step, "flow.max_step", "must be at least flow.step");
  require(f.truncation_tol > 0.0, "flow.truncation_tol", "must be positive");

  if (c.minimize.frame == FrameChoice::blowup) {
    require(p.b > 0.0, "minimize.frame", "blow-up frame needs b > 0");
  }

  require(c.townes.tol > 0.0, "townes.tol", "must be positive");
  for (std::size_t i = 0; i < c.townes.moments.size(); ++i) {
    const double m = c.townes.moments[i];
    require(m > 0.0 && m < 2.0, "townes.moments[" + std::to_string(i) + "]", "must lie in (0, 2)");
  }

  auto& s = c.sweep;
  if (s.b_list.empty()) s.b_list = default_b_list(s.regime);
  for (std::size_t i = 0; i < s.b_list.size(); ++i) {
    const std::string path = "sweep.b_list[" + std::to_string(i) + "]";
    require(s.b_list[i] > 0.0, path, "must be positive");
    if (i > 0) require(s.b_list[i] < s.b_list[i - 1], path, "b_list must be strictly decreasing");
  }
  for (std::size_t i = 0; i < s.overrides.size(); ++i) {
    require(s.overrides[i].index < s.b_list.size(), "sweep.overrides[" + std::to_string(i) + "].index",
            "out of range");
  }
  if (c.subcommand == Subcommand::sweep) {
    if (s.regime == Regime::critical) {
      require(p.a_over_astar && *p.a_over_astar == 1.0, "params.a_over_astar", "critical sweep needs a/a* = 1");
    } else if (p.a_over_astar) {
      require(*p.a_over_astar > 1.0, "params.a_over_astar", "supercritical sweep needs a/a* > 1");
    }
  }

  auto& v = c.verify;
  for (std::size_t i = 0; i < v.p_list.size(); ++i) {
    require(v.p_list[i] > 0.0 && v.p_list[i] < 2.0, "verify.p_list[" + std::to_string(i) + "]", "must lie in (0, 2)");
  }
  for (std::size_t i = 0; i < v.a_ratio_list.size(); ++i) {
    require(v.a_ratio_list[i] >= 1.0, "verify.a_ratio_list[" + std::to_string(i) + "]", "must be at least 1");
  }
  for (std::size_t i = 0; i < v.b_list.size(); ++i) {
    require(v.b_list[i] > 0.0, "verify.b_list[" + std::to_string(i) + "]", "must be positive");
  }
  require(v.gn_samples >= 0, "verify.gn_samples", "must be non-negative");

  for (std::size_t i = 0; i < c.lemma4.eps.size(); ++i) {
    require(c.lemma4.eps[i] > 0.0, "lemma4.eps[" + std::to_string(i) + "]", "must be positive");
  }
  require(!c.lemma4.eps.empty(), "lemma4.eps", "must not be empty");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

// ---------------------------------------------------------------------------

struct Context {
  std::filesystem::path dir;
  std::vector<std::string> outputs;
  std::optional<double> a_star;

  void write(const std::string& name, const std::string& content) {
    atomic_write(dir / name, content);
    outputs.push_back(name);
  }
};

GroundStateData ground_state(const RunConfig& c, Context& ctx) {
  GroundStateData gs = shoot_q(RadialGrid::make(c.grid), c.townes.tol);
  ctx.a_star = gs.a_star;
  return gs;
}

double resolve_a(const RunConfig& c, const GroundStateData& gs) {
  return c.params.a ? *c.params.a : *c.params.a_over_astar * gs.a_star;
}

json breakdown_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic},
          {"kirchhoff", e.kirchhoff},
          {"potential", e.potential},
          {"interaction", e.interaction},
          {"total", e.total}};
}

json fit_json(const LimitFit& f, double target) {
  return {{"estimate", f.estimate},
          {"rate", f.rate},
          {"coefficient", f.coefficient},
          {"residual", f.residual},
          {"samples_used", f.samples_used},
          {"target", target},
          {"relative_error", std::abs(f.estimate - target) / std::abs(target)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int run_townes(const RunConfig& c, Context& ctx, std::ostream& log) {
  const GroundStateData gs = ground_state(c, ctx);
  json moments = json::array();
  for (double p : c.townes.moments) moments.push_back({{"p", p}, {"M_p", gs.moment(p)}});
  const json out = {{"q_origin", gs.q_origin},
                    {"a_star", gs.a_star},
                    {"kinetic_q", gs.kinetic_q},
                    {"half_quartic_q", gs.half_quartic_q},
                    {"consistency_spread", gs.consistency_spread},
                    {"match_radius", gs.match_radius},
                    {"gn_defect_q0", gn_defect(gs.q0, gs.a_star)},
                    {"moments", moments}};
  ctx.write("townes.json", dump(out));
  ctx.write("townes_profile.csv", profile_csv({"Q", "Q0"}, {gs.q, gs.q0}));
  log << "a* = " << format_double(gs.a_star) << ", Q(0) = " << format_double(gs.q_origin)
      << ", consistency spread = " << format_double(gs.consistency_spread) << "\n";
  return kExitOk;
}

int run_minimize(const RunConfig& c, Context& ctx, std::ostream& log) {
  const GroundStateData gs = ground_state(c, ctx);
  const ModelParams params{resolve_a(c, gs), c.params.b, c.params.p, c.params.potential};
  params.validate();
  if (params.b == 0.0 && params.a >= gs.a_star) throw InfimumNotAttained("infimum not attained: b = 0 with a >= a*");

  const bool blowup = c.minimize.frame == FrameChoice::blowup ||
                      (c.minimize.frame == FrameChoice::automatic && params.b > 0.0);
  FlowOptions flow = c.flow;
  flow.frame = blowup ? Frame::blowup(blowup_scale(params, gs.a_star)) : Frame::physical();

  RadialFunction init = gs.q0;
  if (c.minimize.init == InitChoice::gaussian) {
    init = gaussian_profile(gs.grid());
  } else if (blowup) {
    double beta = 1.0;
    if (params.a > gs.a_star) {
      beta = std::sqrt(0.5 * (params.a / gs.a_star - 1.0));
    } else if (params.with_potential) {
      beta = beta_limit(params.p, gs.moment(params.p));
    }
    init = normalized(rescale_profile(gs.q0, beta));
  }

  const MinimizeResult res = minimize(params, init, flow, gs.a_star);
  const double eps = res.frame_used.eps;
  json out = {{"params",
               {{"a", params.a},
                {"a_over_astar", params.a / gs.a_star},
                {"b", params.b},
                {"p", params.p},
                {"potential", params.with_potential}}},
              {"a_star", gs.a_star},
              {"frame", {{"kind", to_string(res.frame_used.kind)}, {"eps", eps}}},
              {"energy", breakdown_json(res.breakdown)},
              {"mu", res.mu},
              {"residual", res.residual},
              {"physical_mu", res.mu / (eps * eps)},
              {"physical_residual", res.residual / (eps * eps * eps)},
              {"iterations", res.iterations},
              {"converged", res.converged},
              {"mass", mass(res.profile)},
              {"monotone", monotone_check(res.profile, 1e-8 * res.profile[0])},
              {"domain_too_small", res.domain_too_small},
              {"initial_frame_energy", res.initial_energy}};
  if (params.b > 0.0) out["upper_bound"] = upper_bound(params, gs.a_star, gs.moment(params.p));
  ctx.write("minimize.json", dump(out));
  ctx.write("profile.csv", profile_csv({"u"}, {res.profile}));
  if (blowup) ctx.write("frame_profile.csv", profile_csv({"v"}, {res.frame_profile}));
  log << "E = " << format_double(res.breakdown.total) << ", residual = " << format_double(res.residual)
      << ", iterations = " << res.iterations << (res.converged ? "" : " (not converged)") << "\n";
  return res.converged ? kExitOk : kExitNonconverged;
}

int run_sweep_cmd(const RunConfig& c, Context& ctx, std::ostream& log) {
  const GroundStateData gs = ground_state(c, ctx);
  SweepSpec spec;
  spec.regime = c.sweep.regime;
  spec.a_ratio = c.params.a_over_astar ? *c.params.a_over_astar : *c.params.a / gs.a_star;
  if (spec.regime == Regime::supercritical && !(spec.a_ratio > 1.0)) {
    throw ConfigError("params.a", "supercritical sweep needs a > a*");
  }
  spec.p = c.params.p;
  spec.b_list = c.sweep.b_list;
  spec.warm_start = c.sweep.warm_start;
  spec.flow = c.flow;
  spec.overrides = c.sweep.overrides;
  const auto records = run_sweep(gs, spec);

  std::ostringstream csv;
  csv << "b,E,kinetic,kirchhoff,potential,interaction,scaled_energy,beta_est,profile_h1,converged,"
         "kinetic_scaled,potential_scaled,upper_bound,mu,residual,iterations\n";
  for (const auto& r : records) {
    csv << format_double(r.b) << ',' << format_double(r.energy.total) << ',' << format_double(r.energy.kinetic)
        << ',' << format_double(r.energy.kirchhoff) << ',' << format_double(r.energy.potential) << ','
        << format_double(r.energy.interaction) << ',' << format_double(r.scaled_energy) << ','
        << format_double(r.beta_est) << ',' << format_double(r.profile_h1) << ',' << (r.converged ? 1 : 0) << ','
        << format_double(r.kinetic_scaled) << ',' << format_double(r.potential_scaled) << ','
        << format_double(r.upper_bound) << ',' << format_double(r.mu) << ',' << format_double(r.residual) << ','
        << r.iterations << '\n';
  }
  ctx.write("sweep.csv", csv.str());

  const bool critical = spec.regime == Regime::critical;
  const double m_p = gs.moment(spec.p);
  const double target = critical ? theorem2_limit(spec.p, m_p) : theorem3_limit(spec.a_ratio * gs.a_star, gs.a_star);
  std::size_t converged = 0;
  const SweepRecord* last = nullptr;
  for (const auto& r : records) {
    if (!r.converged) continue;
    ++converged;
    if (!last || r.b < last->b) last = &r;
  }
  const SweepInvariants inv = check_sweep_invariants(records);
  json summary = {{"regime", to_string(spec.regime)},
                  {"a_over_astar", spec.a_ratio},
                  {"a_star", gs.a_star},
                  {"p", spec.p},
                  {"M_p", m_p},
                  {"target", {{"name", critical ? "theorem2_limit" : "theorem3_limit"}, {"value", target}}},
                  {"records", records.size()},
                  {"converged", converged},
                  {"invariants",
                   {{"negative", inv.negative},
                    {"below_upper_bound", inv.below_upper_bound},
                    {"nondecreasing", inv.nondecreasing},
                    {"concave", inv.concave},
                    {"worst_upper", inv.worst_upper},
                    {"worst_monotone", inv.worst_monotone},
                    {"worst_concave", inv.worst_concave}}}};
  if (converged >= 3) {
    summary["fit"] = fit_json(estimate_limit(records, "scaled_energy"), target);
  } else {
    summary["fit"] = nullptr;
  }
  if (last) {
    summary["last_sample"] = {{"b", last->b},
                              {"scaled_energy", last->scaled_energy},
                              {"relative_error", std::abs(last->scaled_energy - target) / std::abs(target)}};
    if (critical) {
      const double beta = beta_limit(spec.p, m_p);
      summary["profile"] = {{"beta_limit", beta},
                            {"beta_est", last->beta_est},
                            {"relative_error", std::abs(last->beta_est - beta) / beta},
                            {"profile_h1", last->profile_h1}};
    }
  }
  ctx.write("sweep.json", dump(summary));
  log << "sweep: " << converged << "/" << records.size() << " converged";
  if (summary["fit"].is_object()) log << ", limit estimate " << format_double(summary["fit"]["estimate"].get<double>());
  log << " (target " << format_double(target) << ")\n";
  return converged == records.size() ? kExitOk : kExitNonconverged;
}

int run_verify(const RunConfig& c, Context& ctx, std::ostream& log) {
  const GroundStateData gs = ground_state(c, ctx);
  const auto& v = c.verify;

  json table = json::array();
  for (double p : v.p_list) {
    const double m_p = gs.moment(p);
    for (double ratio : v.a_ratio_list) {
      json row = {{"p", p}, {"a_over_astar", ratio}, {"M_p", m_p}};
      if (ratio == 1.0) {
        row["theorem2_limit"] = theorem2_limit(p, m_p);
        row["beta_limit"] = beta_limit(p, m_p);
      } else {
        row["theorem2_limit"] = nullptr;
        row["beta_limit"] = nullptr;
      }
      row["theorem3_limit"] = theorem3_limit(ratio * gs.a_star, gs.a_star);
      table.push_back(row);
    }
  }
  json out = {{"a_star", gs.a_star}, {"formulas", table}};
  bool passed = true;

  if (v.mode == VerifyMode::all) {
    out["townes"] = {{"q_origin", gs.q_origin},
                     {"kinetic_q", gs.kinetic_q},
                     {"half_quartic_q", gs.half_quartic_q},
                     {"consistency_spread", gs.consistency_spread}};
    passed = passed && gs.consistency_spread <= 1e-6;

    std::mt19937_64 rng(c.seed);
    double min_defect = std::numeric_limits<double>::infinity();
    for (int k = 0; k < v.gn_samples; ++k) {
      min_defect = std::min(min_defect, gn_defect(random_profile(gs.grid(), rng), gs.a_star));
    }
    const double q0_defect = gn_defect(gs.q0, gs.a_star);
    out["gagliardo_nirenberg"] = {{"samples", v.gn_samples},
                                  {"seed", c.seed},
                                  {"min_defect", v.gn_samples > 0 ? json(min_defect) : json(nullptr)},
                                  {"q0_defect", q0_defect}};
    passed = passed && (v.gn_samples == 0 || min_defect >= -1e-6) && q0_defect <= 1e-6;

    json ub = json::array();
    for (double p : v.p_list) {
      const double m_p = gs.moment(p);
      for (double b : v.b_list) {
        const ModelParams params{gs.a_star, b, p, true};
        const double value = upper_bound(params, gs.a_star, m_p);
        const double closed = std::pow(b, -p / (4.0 - p)) * theorem2_limit(p, m_p);
        const double rel = std::abs(value - closed) / std::abs(closed);
        ub.push_back({{"p", p}, {"b", b}, {"upper_bound", value}, {"closed_form", closed}, {"relative_error", rel}});
        passed = passed && rel <= 1e-8;
      }
    }
    out["upper_bound_check"] = ub;

    json l4 = json::array();
    for (double p : v.p_list) {
      const bool calibrated = !c.lemma4.c_cal.has_value();
      const double c_cal = calibrated ? calibrate_lemma4(gs, p, c.lemma4.eps) : *c.lemma4.c_cal;
      const auto rq = lemma4_check(gs.q0, c.lemma4.eps, p, c_cal);
      const auto rg = lemma4_check(gaussian_profile(gs.grid()), c.lemma4.eps, p, c_cal);
      l4.push_back({{"p", p},
                    {"c_cal", c_cal},
                    {"calibrated", calibrated},
                    {"max_rho_q0", rq.max_rho},
                    {"max_rho_gaussian", rg.max_rho},
                    {"within", rq.within && rg.within}});
      passed = passed && rq.within && rg.within;
    }
    out["lemma4"] = l4;
    out["passed"] = passed;
  }
  const std::string text = dump(out);
  ctx.write("verify.json", text);
  log << text;
  return passed ? kExitOk : kExitFailure;
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::townes: return "townes";
    case Subcommand::minimize: return "minimize";
    case Subcommand::sweep: return "sweep";
    case Subcommand::verify: return "verify";
  }
  return "";
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  const auto sub = root.string("subcommand");
  if (!sub) throw ConfigError("subcommand", "required");
  c.subcommand = pick<Subcommand>("subcommand", *sub,
                                  {{"townes", Subcommand::townes},
                                   {"minimize", Subcommand::minimize},
                                   {"sweep", Subcommand::sweep},
                                   {"verify", Subcommand::verify}});
  if (auto s = root.section("params")) parse_params(*s, c.params);
  if (auto s = root.section("grid")) parse_grid(*s, c.grid);
  if (auto s = root.section("flow")) parse_flow(*s, c.flow);
  if (auto s = root.section("minimize")) {
    if (auto v = s->string("frame")) {
      c.minimize.frame = pick<FrameChoice>(s->at("frame"), *v,
                                           {{"auto", FrameChoice::automatic},
                                            {"physical", FrameChoice::physical},
                                            {"blowup", FrameChoice::blowup}});
    }
    if (auto v = s->string("init")) {
      c.minimize.init = pick<InitChoice>(s->at("init"), *v, {{"q0", InitChoice::q0}, {"gaussian", InitChoice::gaussian}});
    }
    s->finish();
  }
  if (auto s = root.section("townes")) {
    s->number("tol", c.townes.tol);
    s->numbers("moments", c.townes.moments);
    s->finish();
  }
  if (auto s = root.section("sweep")) parse_sweep(*s, c.sweep);
  if (auto s = root.section("verify")) parse_verify(*s, c.verify);
  if (auto s = root.section("lemma4")) {
    s->number("c_cal", c.lemma4.c_cal);
    s->numbers("eps", c.lemma4.eps);
    s->finish();
  }
  if (auto v = root.string("output_dir")) c.output_dir = *v;
  root.integer("seed", c.seed);
  root.finish();
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json params = {{"b", c.params.b}, {"p", c.params.p}, {"potential", c.params.potential}};
  if (c.params.a) params["a"] = *c.params.a;
  if (c.params.a_over_astar) params["a_over_astar"] = *c.params.a_over_astar;
  json overrides = json::array();
  for (const auto& o : c.sweep.overrides) overrides.push_back({{"index", o.index}, {"max_iters", o.max_iters}});
  const auto& f = c.flow;
  json out = {
      {"subcommand", to_string(c.subcommand)},
      {"params", params},
      {"grid", {{"n", c.grid.n}, {"r", c.grid.radius}, {"grading", to_string(c.grid.grading)}, {"core", c.grid.core}}},
      {"flow",
       {{"step", f.step},
        {"max_iters", f.max_iters},
        {"energy_tol", f.energy_tol},
        {"stall_window", f.stall_window},
        {"residual_tol", f.residual_tol},
        {"backtracking", f.backtracking},
        {"max_halvings", f.max_halvings},
        {"growth", f.growth},
        {"max_step", f.max_step},
        {"truncation_tol", f.truncation_tol}}},
      {"minimize", {{"frame", name_of(c.minimize.frame)}, {"init", name_of(c.minimize.init)}}},
      {"townes", {{"tol", c.townes.tol}, {"moments", c.townes.moments}}},
      {"sweep",
       {{"regime", to_string(c.sweep.regime)},
        {"b_list", c.sweep.b_list},
        {"warm_start", c.sweep.warm_start},
        {"overrides", overrides}}},
      {"verify",
       {{"mode", name_of(c.verify.mode)},
        {"p_list", c.verify.p_list},
        {"a_ratio_list", c.verify.a_ratio_list},
        {"b_list", c.verify.b_list},
        {"gn_samples", c.verify.gn_samples}}},
      {"lemma4", {{"eps", c.lemma4.eps}}},
      {"output_dir", c.output_dir},
      {"seed", c.seed}};
  if (c.lemma4.c_cal) out["lemma4"]["c_cal"] = *c.lemma4.c_cal;
  return out;
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return config.output_dir;
}

int run(const RunConfig& config, std::ostream& log) {
  Context ctx{resolve_output_dir(config), {}, std::nullopt};
  std::filesystem::create_directories(ctx.dir);
  int code = kExitOk;
  std::string message;
  try {
    switch (config.subcommand) {
      case Subcommand::townes: code = run_townes(config, ctx, log); break;
      case Subcommand::minimize: code = run_minimize(config, ctx, log); break;
      case Subcommand::sweep: code = run_sweep_cmd(config, ctx, log); break;
      case Subcommand::verify: code = run_verify(config, ctx, log); break;
    }
  } catch (const ConfigError& e) {
    code = kExitValidation;
    message = e.what();
  } catch (const DomainError& e) {
    code = kExitValidation;
    message = e.what();
  } catch (const ConvergenceError& e) {
    code = kExitNonconverged;
    message = e.what();
  }
  if (!message.empty()) log << "error: " << message << "\n";

  json manifest = {{"tool", "kgp"},
                   {"version", kVersion},
                   {"subcommand", to_string(config.subcommand)},
                   {"config", to_json(config)},
                   {"a_star", ctx.a_star ? json(*ctx.a_star) : json(nullptr)},
                   {"outputs", ctx.outputs},
                   {"exit_code", code}};
  if (!message.empty()) manifest["error"] = message;
  atomic_write(ctx.dir / "manifest.json", dump(manifest));
  return code;
}

}  // namespace kgp::cli
