#include "stgf/config.hpp"

#include "stgf/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace stgf {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Section
{
public:
  Section(const json& root, const std::string& name, std::set<std::string> allowed) : name_(name)
  {
    if (!root.contains(name)) { return; }
    node_ = &root.at(name);
    if (!node_->is_object()) { throw ConfigError("section '" + name + "' must be an object", name); }
    for (const auto& [k, v] : node_->items()) {
      if (!allowed.count(k)) { throw ConfigError("unknown key '" + name + "." + k + "'", name + "." + k); }
    }
  }

  template <class T>
  void read(const char* key, T& out) const
  {
    if (node_ == nullptr || !node_->contains(key)) { return; }
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + full(key) + "': " + e.what(), full(key));
    }
  }

  const json* get(const char* key) const
  {
    return node_ != nullptr && node_->contains(key) ? &node_->at(key) : nullptr;
  }

  std::string full(const char* key) const { return name_ + "." + key; }

private:
  std::string name_;
  const json* node_ = nullptr;
};

ClassKappa::Kind kind_of(const Section& s, const char* key, ClassKappa::Kind dflt)
{
  std::string v = to_string(dflt);
  s.read(key, v);
  const auto k = parse_kappa_kind(v);
  if (!k) { throw ConfigError("unknown class-kappa kind '" + v + "'", s.full(key)); }
  return *k;
}

template <class Fn>
void checked(const std::string& key, Fn fn)
{
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), key);
  }
}

}  // namespace

Reference RunConfig::final_reference() const
{
  return scenario.reference_at(scenario.n_steps > 0 ? scenario.n_steps - 1 : 0);
}

CostParams RunConfig::final_cost() const
{
  CostParams c = cost;
  const Reference r = final_reference();
  c.p_ref = r.p_ref;
  c.q_ref = r.q_ref;
  return c;
}

RunConfig default_config()
{
  RunConfig cfg;
  cfg.scenario.u0 = Input{cfg.cost.v_nom, cfg.cost.omega_nom};
  cfg.scenario.initial_ref = Reference{cfg.cost.p_ref, cfg.cost.q_ref};
  return cfg;
}

RunConfig parse_config(const std::string& text)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what(), "");
  }
  if (!root.is_object()) { throw ConfigError("config root must be an object", ""); }

  static const std::set<std::string> sections{"plant", "grid", "cost", "ctrl", "droop", "sim", "scenario", "equilibrium"};
  for (const auto& [k, v] : root.items()) {
    if (!sections.count(k)) { throw ConfigError("unknown section '" + k + "'", k); }
  }

  RunConfig cfg = default_config();

  const Section plant(root, "plant", {"r_pu", "l_pu", "i_max_pu", "f_base_hz", "k_pq", "iq_cross_coupling"});
  plant.read("r_pu", cfg.plant.r);
  plant.read("l_pu", cfg.plant.l);
  plant.read("i_max_pu", cfg.plant.i_max);
  double f_base = cfg.plant.omega_base / kTwoPi;
  plant.read("f_base_hz", f_base);
  cfg.plant.omega_base = kTwoPi * f_base;
  plant.read("k_pq", cfg.plant.k_pq);
  plant.read("iq_cross_coupling", cfg.plant.iq_cross_coupling);
  checked("plant", [&] { cfg.plant.validate(); });

  const Section grid(root, "grid", {"e_pu", "f_hz"});
  grid.read("e_pu", cfg.grid.e_mag);
  double f_grid = cfg.grid.omega_e / kTwoPi;
  grid.read("f_hz", f_grid);
  cfg.grid.omega_e = kTwoPi * f_grid;
  checked("grid", [&] { cfg.grid.validate(); });

  const Section cost(root, "cost", {"m_p", "m_q", "tau_v", "p_ref", "q_ref", "v_nom", "f_nom_hz"});
  cost.read("m_p", cfg.cost.m_p);
  cost.read("m_q", cfg.cost.m_q);
  cost.read("tau_v", cfg.cost.tau_v);
  cost.read("p_ref", cfg.cost.p_ref);
  cost.read("q_ref", cfg.cost.q_ref);
  cost.read("v_nom", cfg.cost.v_nom);
  double f_nom = cfg.cost.omega_nom / kTwoPi;
  cost.read("f_nom_hz", f_nom);
  cfg.cost.omega_nom = kTwoPi * f_nom;
  checked("cost", [&] { cfg.cost.validate(); });

  const Section ctrl(root, "ctrl",
    {"type", "horizon", "k_updates", "xi", "alpha_kind", "alpha_gain", "alpha_rate", "alpha_eq_gain",
     "exponential_alpha_both", "init", "qp_tol", "qp_max_iter", "warm_start"});
  ctrl.read("type", cfg.ctrl_type);
  if (cfg.ctrl_type != "stgf" && cfg.ctrl_type != "droop") {
    throw ConfigError("ctrl.type must be 'stgf' or 'droop'", "ctrl.type");
  }
  ctrl.read("horizon", cfg.stgf.spec.horizon_t);
  ctrl.read("k_updates", cfg.stgf.k_updates);
  ctrl.read("xi", cfg.stgf.xi);
  cfg.stgf.kappa.ineq.kind = kind_of(ctrl, "alpha_kind", cfg.stgf.kappa.ineq.kind);
  ctrl.read("alpha_gain", cfg.stgf.kappa.ineq.gain);
  ctrl.read("alpha_rate", cfg.stgf.kappa.ineq.rate);
  ctrl.read("alpha_eq_gain", cfg.stgf.kappa.eq.gain);
  bool exp_alpha = false;
  ctrl.read("exponential_alpha_both", exp_alpha);
  if (exp_alpha) {
    cfg.stgf.kappa.ineq.kind = ClassKappa::Kind::exponential;
    cfg.stgf.kappa.eq = cfg.stgf.kappa.ineq;
  }
  std::string init = "nominal";
  ctrl.read("init", init);
  if (init == "zero") {
    cfg.scenario.u0 = Input{0.0, 0.0};
  } else if (init == "nominal") {
    cfg.scenario.u0 = Input{cfg.cost.v_nom, cfg.cost.omega_nom};
  } else {
    throw ConfigError("ctrl.init must be 'nominal' or 'zero'", "ctrl.init");
  }
  ctrl.read("qp_tol", cfg.stgf.qp.tol);
  ctrl.read("qp_max_iter", cfg.stgf.qp.max_iter);
  ctrl.read("warm_start", cfg.stgf.qp.warm_start);

  const Section droop(root, "droop", {"k_p", "k_q", "tau_f", "i_thresh", "k_vi", "k_sync"});
  droop.read("k_p", cfg.droop.k_p);
  droop.read("k_q", cfg.droop.k_q);
  droop.read("tau_f", cfg.droop.tau_f);
  droop.read("i_thresh", cfg.droop.i_thresh);
  droop.read("k_vi", cfg.droop.k_vi);
  droop.read("k_sync", cfg.droop.k_sync);
  checked("droop", [&] { cfg.droop.validate(cfg.plant.i_max); });

  const Section sim(root, "sim", {"dt_ms", "n_steps", "substeps", "integrator"});
  double dt_ms = cfg.stgf.spec.dt * 1e3;
  sim.read("dt_ms", dt_ms);
  cfg.stgf.spec.dt = dt_ms * 1e-3;
  cfg.scenario.dt = cfg.stgf.spec.dt;
  sim.read("n_steps", cfg.scenario.n_steps);
  cfg.stgf.n_steps = static_cast<int>(cfg.scenario.n_steps);
  sim.read("substeps", cfg.scenario.substeps);
  std::string integrator = "rk4";
  sim.read("integrator", integrator);
  if (integrator == "euler") {
    cfg.scenario.integrator = Integrator::euler;
  } else if (integrator != "rk4") {
    throw ConfigError("sim.integrator must be 'rk4' or 'euler'", "sim.integrator");
  }
  checked("ctrl", [&] { cfg.stgf.validate(); });

  const Section scenario(root, "scenario", {"steps"});
  if (const json* steps = scenario.get("steps")) {
    if (!steps->is_array()) { throw ConfigError("scenario.steps must be an array", "scenario.steps"); }
    cfg.scenario.references.clear();
    for (const auto& s : *steps) {
      try {
        cfg.scenario.references.push_back({s.at("index").get<long>(), s.at("p_ref").get<double>(), s.at("q_ref").get<double>()});
      } catch (const json::exception& e) {
        throw ConfigError(std::string("bad entry in scenario.steps: ") + e.what(), "scenario.steps");
      }
    }
  }
  cfg.scenario.initial_ref = Reference{cfg.cost.p_ref, cfg.cost.q_ref};
  cfg.scenario.initial_grid = cfg.grid;
  checked("scenario.steps", [&] { cfg.scenario.validate(); });

  const Section eq(root, "equilibrium", {"tol"});
  eq.read("tol", cfg.equilibrium_tol);
  if (!(cfg.equilibrium_tol > 0)) { throw ConfigError("equilibrium.tol must be > 0", "equilibrium.tol"); }

  return cfg;
}

RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot read config file '" + path + "'", ""); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::unique_ptr<Controller> make_controller(const RunConfig& cfg, const std::string& type)
{
  const std::string& t = type.empty() ? cfg.ctrl_type : type;
  if (t == "stgf") { return std::make_unique<StgfController>(cfg.plant, cfg.cost, cfg.stgf); }
  if (t == "droop") { return std::make_unique<DroopController>(cfg.plant, cfg.cost, cfg.droop, cfg.scenario.dt); }
  throw ConfigError("unknown controller type '" + t + "'", "ctrl.type");
}

SimRecord run_config(const RunConfig& cfg, const std::string& type)
{
  auto ctrl = make_controller(cfg, type);
  return run_scenario(cfg.scenario, *ctrl, cfg.plant, cfg.cost);
}

}  // namespace stgf
