#include "labo/opt/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "labo/core/errors.hpp"

namespace labo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": expected integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": expected real, got '" + v + "'");
  }
}

void check_enum(const std::string& key, const std::string& v, const std::set<std::string>& allowed) {
  if (!allowed.count(v)) {
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
    throw ConfigError("key " + key + ": '" + v + "' not in {" + opts + "}");
  }
}

}  // namespace

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  const std::string v = trim(value);
  const std::string& k = dotted_key;

  if (k == "run.optimizer") { check_enum(k, v, {"labo", "raw_bo", "cmaes", "uniform"}); optimizer = v; }
  else if (k == "run.seed") seed = static_cast<std::uint64_t>(parse_int(k, v));
  else if (k == "run.budget") budget = static_cast<int>(parse_int(k, v));
  else if (k == "run.suite_manifest") suite_manifest = v;
  else if (k == "run.n_tasks") n_tasks = static_cast<int>(parse_int(k, v));
  else if (k == "run.suite_seed") suite_seed = static_cast<std::uint64_t>(parse_int(k, v));
  else if (k == "run.out_dir") out_dir = v;
  else if (k == "run.fixed_fingers") fixed_fingers = static_cast<int>(parse_int(k, v));
  else if (k == "run.checkpoint_every") checkpoint_every = static_cast<int>(parse_int(k, v));
  else if (k == "labo.n_pre") n_pre = static_cast<int>(parse_int(k, v));
  else if (k == "labo.pretrain_steps") pretrain_steps = static_cast<int>(parse_int(k, v));
  else if (k == "labo.finetune_steps") finetune_steps = static_cast<int>(parse_int(k, v));
  else if (k == "labo.refit_interval") refit_interval = static_cast<int>(parse_int(k, v));
  else if (k == "labo.beta") beta = parse_real(k, v);
  else if (k == "labo.batch_size") batch_size = static_cast<int>(parse_int(k, v));
  else if (k == "labo.lr") lr = parse_real(k, v);
  else if (k == "labo.kl_weight") kl_weight = parse_real(k, v);
  else if (k == "labo.kl_direction") { check_enum(k, v, {"paper", "standard"}); kl_direction = v; }
  else if (k == "labo.acq_sign") { check_enum(k, v, {"default", "paper"}); acq_sign = v; }
  else if (k == "gp.nu") nu = parse_real(k, v);
  else if (k == "gp.acq_raw_samples") acq_raw_samples = static_cast<int>(parse_int(k, v));
  else if (k == "gp.acq_restarts") acq_restarts = static_cast<int>(parse_int(k, v));
  else if (k == "gp.acq_refine_steps") acq_refine_steps = static_cast<int>(parse_int(k, v));
  else if (k == "gp.candidates") candidates = static_cast<int>(parse_int(k, v));
  else if (k == "gp.fit_restarts") fit_restarts = static_cast<int>(parse_int(k, v));
  else if (k == "gp.fit_ascent_steps") fit_ascent_steps = static_cast<int>(parse_int(k, v));
  else if (k == "eval.control_mode") { check_enum(k, v, {"velocity", "torque"}); control_mode = v; }
  else if (k == "eval.reward_variant") { check_enum(k, v, {"icra", "v1"}); reward_variant = v; }
  else if (k == "eval.score_floor") score_floor = parse_real(k, v);
  else if (k == "eval.cost_weight") cost_weight = parse_real(k, v);
  else if (k == "eval.closing_steps") closing_steps = static_cast<int>(parse_int(k, v));
  else if (k == "eval.stiffness") stiffness = parse_real(k, v);
  else if (k == "eval.rot_stiffness") rot_stiffness = parse_real(k, v);
  else if (k == "eval.lift_height") lift_height = parse_real(k, v);
  else if (k == "cmaes.lambda") lambda = static_cast<int>(parse_int(k, v));
  else if (k == "cmaes.sigma0") sigma0 = parse_real(k, v);
  else throw ConfigError("unknown config key: " + k);
}

void RunConfig::validate() const {
  auto positive = [](const char* name, auto value) {
    if (!(value > 0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("run.budget", budget);
  positive("run.n_tasks", n_tasks);
  positive("labo.n_pre", n_pre);
  positive("labo.finetune_steps", finetune_steps);
  positive("labo.refit_interval", refit_interval);
  positive("labo.batch_size", batch_size);
  positive("labo.lr", lr);
  positive("gp.acq_raw_samples", acq_raw_samples);
  positive("gp.acq_restarts", acq_restarts);
  positive("gp.candidates", candidates);
  positive("eval.closing_steps", closing_steps);
  positive("eval.stiffness", stiffness);
  positive("eval.rot_stiffness", rot_stiffness);
  if (pretrain_steps < 0) throw ConfigError("labo.pretrain_steps must be >= 0");
  if (beta < 0.0) throw ConfigError("labo.beta must be >= 0");
  if (nu != 0.5 && nu != 1.5 && nu != 2.5) throw ConfigError("gp.nu must be 0.5, 1.5 or 2.5");
  if (fixed_fingers != 0 && (fixed_fingers < 2 || fixed_fingers > 6)) {
    throw ConfigError("run.fixed_fingers must be 0 or in 2..6");
  }
  if (out_dir.empty()) throw ConfigError("run.out_dir must be set");
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"run",
       {{"optimizer", optimizer}, {"seed", seed}, {"budget", budget},
        {"suite_manifest", suite_manifest}, {"n_tasks", n_tasks}, {"suite_seed", suite_seed},
        {"out_dir", out_dir}, {"fixed_fingers", fixed_fingers},
        {"checkpoint_every", checkpoint_every}}},
      {"labo",
       {{"n_pre", n_pre}, {"pretrain_steps", pretrain_steps}, {"finetune_steps", finetune_steps},
        {"refit_interval", refit_interval}, {"beta", beta}, {"batch_size", batch_size},
        {"lr", lr}, {"kl_weight", kl_weight}, {"kl_direction", kl_direction},
        {"acq_sign", acq_sign}}},
      {"gp",
       {{"nu", nu}, {"acq_raw_samples", acq_raw_samples}, {"acq_restarts", acq_restarts},
        {"acq_refine_steps", acq_refine_steps}, {"candidates", candidates},
        {"fit_restarts", fit_restarts}, {"fit_ascent_steps", fit_ascent_steps}}},
      {"eval",
       {{"control_mode", control_mode}, {"reward_variant", reward_variant},
        {"score_floor", score_floor}, {"cost_weight", cost_weight},
        {"closing_steps", closing_steps}, {"stiffness", stiffness},
        {"rot_stiffness", rot_stiffness}, {"lift_height", lift_height}}},
      {"cmaes", {{"lambda", lambda}, {"sigma0", sigma0}}}};
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    cfg.set(section + "." + key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace labo
