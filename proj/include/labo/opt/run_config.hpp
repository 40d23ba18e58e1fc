#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace labo {

// Every field is addressable as "section.key" in config files and CLI
// overrides; unknown keys are hard errors. Defaults are the full-scale
// settings; configs/desk.ini carries the desk-scale overrides.
struct RunConfig {
  // [run]
  std::string optimizer = "labo";  // labo | raw_bo | cmaes | uniform
  std::uint64_t seed = 0;
  int budget = 200;  // score-function evaluations (N_BO for labo)
  std::string suite_manifest;  // empty: procedural suite below
  int n_tasks = 160;           // train tasks of the procedural suite
  std::uint64_t suite_seed = 12345;
  std::string out_dir = "runs/out";
  int fixed_fingers = 0;  // 0 free; 2..6 pins the finger-count block
  int checkpoint_every = 10;

  // [labo]
  int n_pre = 2048;            // pretraining draws
  int pretrain_steps = 100000;  // N1 (desk-scale override: 10000)
  int finetune_steps = 2000;   // N2 per BO iteration
  int refit_interval = 2;      // N3
  double beta = 0.2;
  int batch_size = 32;
  double lr = 1e-4;
  double kl_weight = 1.0;
  std::string kl_direction = "paper";  // paper | standard
  std::string acq_sign = "default";    // default | paper

  // [gp]
  double nu = 2.5;
  int acq_raw_samples = 1024;
  int acq_restarts = 10;
  int acq_refine_steps = 50;
  int candidates = 2;
  int fit_restarts = 4;
  int fit_ascent_steps = 60;

  // [eval]
  std::string control_mode = "velocity";  // velocity | torque
  std::string reward_variant = "icra";    // icra | v1
  double score_floor = -1.0;
  double cost_weight = 0.1;
  int closing_steps = 2000;
  double stiffness = 500.0;
  double rot_stiffness = 200.0;
  double lift_height = 0.1;

  // [cmaes]
  int lambda = 0;  // 0: 4 + floor(3 ln d)
  double sigma0 = 0.3;

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;

  // Applies one "section.key" = value assignment; throws ConfigError on an
  // unknown key or unparsable value.
  void set(const std::string& dotted_key, const std::string& value);
};

// Flat key-value config text with [section] headers, '#' comments.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

}  // namespace labo
