#include "labo/opt/labo_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "labo/core/errors.hpp"
#include "labo/core/hash.hpp"
#include "labo/design/layout.hpp"
#include "labo/gp/acquisition.hpp"
#include "labo/nn/training.hpp"
#include "labo/opt/baselines.hpp"

namespace labo {

namespace fs = std::filesystem;

ScoreParams score_params_from(const RunConfig& cfg) {
  ScoreParams sp;
  sp.cost_weight = cfg.cost_weight;
  sp.score_floor = cfg.score_floor;
  sp.control_mode = cfg.control_mode == "torque" ? ControlMode::kTorque : ControlMode::kVelocity;
  sp.episode.closing_steps = cfg.closing_steps;
  sp.episode.stiffness = cfg.stiffness;
  sp.episode.rot_stiffness = cfg.rot_stiffness;
  sp.episode.lift_height = cfg.lift_height;
  sp.episode.reward_variant =
      cfg.reward_variant == "v1" ? RewardVariant::kV1 : RewardVariant::kIcra;
  return sp;
}

std::pair<ScoreReport, ScoreReport> evaluate_design(const ParamVector& theta,
                                                    const TaskSuite& suite, std::uint64_t seed,
                                                    const ScoreParams& params) {
  return {score(theta, suite, false, seed, params), score(theta, suite, true, seed, params)};
}

nlohmann::json report_to_json(const ScoreReport& r) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({{"grasp_type", to_string(t.type)},
                     {"complexity", to_string(t.bin)},
                     {"reward", t.reward},
                     {"success", t.success},
                     {"survived", t.survived}});
  }
  return nlohmann::json{{"F", r.F},
                        {"cost", r.cost},
                        {"rejected", r.rejected},
                        {"per_task_rewards", r.per_task_rewards},
                        {"p", r.p},
                        {"per_type_success_rate", r.per_type_success_rate},
                        {"type_counts", r.type_counts},
                        {"overall_success_rate", r.overall_success_rate},
                        {"tasks", tasks}};
}

ScoreReport report_from_json(const nlohmann::json& j) {
  ScoreReport r;
  r.F = j.at("F").get<double>();
  r.cost = j.at("cost").get<double>();
  r.rejected = j.at("rejected").get<bool>();
  r.per_task_rewards = j.at("per_task_rewards").get<std::vector<double>>();
  r.p = j.at("p").get<std::vector<std::uint8_t>>();
  const auto& rates = j.at("per_type_success_rate");
  for (int i = 0; i < 3; ++i) r.per_type_success_rate[i] = rates[i].get<double>();
  const auto& counts = j.at("type_counts");
  for (int i = 0; i < 3; ++i) r.type_counts[i] = counts[i].get<int>();
  r.overall_success_rate = j.at("overall_success_rate").get<double>();
  for (const auto& tj : j.at("tasks")) {
    TaskOutcome t;
    t.type = grasp_type_from_string(tj.at("grasp_type").get<std::string>());
    const std::string bin = tj.at("complexity").get<std::string>();
    t.bin = bin == "low" ? ComplexityBin::kLow
                         : (bin == "medium" ? ComplexityBin::kMedium : ComplexityBin::kHigh);
    t.reward = tj.at("reward").get<double>();
    t.success = tj.at("success").get<bool>();
    t.survived = tj.at("survived").get<int>();
    r.tasks.push_back(t);
  }
  return r;
}

std::uint64_t runlog_content_hash(const std::vector<nlohmann::json>& records) {
  Fnv1a64 h;
  for (const auto& rec : records) {
    nlohmann::json clean = rec;
    clean.erase("wall_ms");
    if (clean.contains("config")) {
      // Paths are volatile; the suite content hash is recorded separately.
      clean["config"]["run"].erase("out_dir");
      clean["config"]["run"].erase("suite_manifest");
    }
    h.update(clean.dump());
    h.update("\n");
  }
  return h.digest();
}

namespace {

nlohmann::json record_to_json(const EvalRecord& r) {
  return nlohmann::json{{"type", "iteration"},
                        {"iteration", r.iteration},
                        {"theta", r.theta},
                        {"f", r.f},
                        {"F", r.F},
                        {"cost", r.cost},
                        {"rejected", r.rejected},
                        {"p", r.p},
                        {"best_F", r.best_F},
                        {"best_success", r.best_success},
                        {"wall_ms", r.wall_ms}};
}

EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.theta = j.at("theta").get<std::vector<double>>();
  r.f = j.at("f").get<std::vector<double>>();
  r.F = j.at("F").get<double>();
  r.cost = j.at("cost").get<double>();
  r.rejected = j.at("rejected").get<bool>();
  r.p = j.at("p").get<std::vector<std::uint8_t>>();
  r.best_F = j.at("best_F").get<double>();
  r.best_success = j.at("best_success").get<double>();
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

struct BestTracker {
  bool valid = false;
  std::vector<double> theta;
  double F = 0.0;
  double success = 0.0;

  void consider(const std::vector<double>& x, double f, double success_rate) {
    if (!valid || f > F) {
      valid = true;
      theta = x;
      F = f;
      success = success_rate;
    }
  }
};

class RunWriter {
 public:
  RunWriter(const RunConfig& cfg, const TaskSuite& suite) : cfg_(cfg) {
    fs::create_directories(cfg.out_dir);
    runlog_path_ = cfg.out_dir + "/runlog.jsonl";
    curve_path_ = cfg.out_dir + "/curve.tsv";
    summary_path_ = cfg.out_dir + "/summary.json";

    config_record_ = nlohmann::json{{"type", "config"},
                                    {"config", cfg.to_json()},
                                    {"layout_schema", DesignLayout::standard().schema()},
                                    {"suite_hash", hex64(suite.content_hash())},
                                    {"wall_ms", 0.0}};
  }

  void start_fresh() {
    log_.open(runlog_path_, std::ios::trunc);
    if (!log_) throw Error("cannot write run log: " + runlog_path_);
    curve_.open(curve_path_, std::ios::trunc);
    curve_ << "iteration\tbest_F\tbest_success_rate\n";
    write_json_line(config_record_);
    records_.push_back(config_record_);
  }

  void resume_with(const std::vector<nlohmann::json>& prior_records) {
    log_.open(runlog_path_, std::ios::trunc);
    if (!log_) throw Error("cannot write run log: " + runlog_path_);
    curve_.open(curve_path_, std::ios::trunc);
    curve_ << "iteration\tbest_F\tbest_success_rate\n";
    for (const auto& rec : prior_records) {
      write_json_line(rec);
      records_.push_back(rec);
      if (rec.value("type", "") == "iteration") {
        curve_ << rec.at("iteration").get<int>() << "\t" << rec.at("best_F").get<double>() << "\t"
               << rec.at("best_success").get<double>() << "\n";
      }
    }
    curve_.flush();
  }

  void write_pretrain(const nlohmann::json& rec) {
    write_json_line(rec);
    records_.push_back(rec);
  }

  void write_iteration(const EvalRecord& r) {
    const nlohmann::json j = record_to_json(r);
    write_json_line(j);
    records_.push_back(j);
    curve_ << r.iteration << "\t" << r.best_F << "\t" << r.best_success << "\n";
    curve_.flush();
  }

  const std::vector<nlohmann::json>& records() const { return records_; }
  const std::string& runlog_path() const { return runlog_path_; }
  const std::string& curve_path() const { return curve_path_; }
  const std::string& summary_path() const { return summary_path_; }

  void finalize(RunResult* result, const TaskSuite& suite) {
    const std::uint64_t hash = runlog_content_hash(records_);
    nlohmann::json summary{{"type", "summary"},
                           {"log_version", 1},
                           {"optimizer", cfg_.optimizer},
                           {"seed", cfg_.seed},
                           {"config", cfg_.to_json()},
                           {"suite_hash", hex64(suite.content_hash())},
                           {"content_hash", hex64(hash)},
                           {"best_F", result->best_F},
                           {"best_theta", result->best_theta},
                           {"evaluations", result->records.size()}};
    if (!result->best_theta.empty()) {
      summary["train_report"] = report_to_json(result->train_report);
      summary["test_report"] = report_to_json(result->test_report);
    }
    if (!result->pretrain_record.is_null()) summary["pretrain"] = result->pretrain_record;
    std::ofstream out(summary_path_);
    out << summary.dump(2) << "\n";
    result->content_hash = hash;
    result->runlog_path = runlog_path_;
    result->curve_path = curve_path_;
    result->summary_path = summary_path_;
  }

 private:
  void write_json_line(const nlohmann::json& j) {
    log_ << j.dump() << "\n";
    log_.flush();
  }

  RunConfig cfg_;
  nlohmann::json config_record_;
  std::vector<nlohmann::json> records_;
  std::ofstream log_;
  std::ofstream curve_;
  std::string runlog_path_, curve_path_, summary_path_;
};

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Shared evaluation closure: pins the finger-count block when the ablation
// is configured, scores the train split, and captures the full report.
struct Evaluator {
  const RunConfig* cfg;
  const TaskSuite* suite;
  ScoreParams params;
  std::vector<std::unique_ptr<ScoreReport>>* slots;

  // The finger-count ablation pins the corresponding block before decoding;
  // records store the pinned vector so stored designs re-evaluate exactly.
  std::vector<double> masked(const std::vector<double>& x) const {
    std::vector<double> v = x;
    if (cfg->fixed_fingers >= 2) {
      v[2] = (cfg->fixed_fingers - 2 + 0.5) / 5.0;
    }
    return v;
  }

  double operator()(const std::vector<double>& x, std::size_t index) const {
    ParamVector theta(masked(x));
    ScoreReport rep = score(theta, *suite, false, cfg->suite_seed, params);
    (*slots)[index] = std::make_unique<ScoreReport>(std::move(rep));
    return (*slots)[index]->F;
  }
};

// ---- LABO state with checkpoint/resume ------------------------------------

struct LaboState {
  RepModel model;
  TrainerState trainer;
  BODataset q;
  std::vector<std::vector<double>> pending;
  StreamRegistry streams;
  int evals_done = 0;
  int evals_at_last_fit = -1;
  BestTracker best;

  nlohmann::json to_json() const {
    nlohmann::json qj = nlohmann::json::array();
    for (const auto& e : q.entries) {
      qj.push_back({{"f", e.f}, {"F", e.F}, {"theta", e.theta}, {"p", e.p},
                    {"encoder_version", e.encoder_version}});
    }
    nlohmann::json streams_j = nlohmann::json::object();
    for (const auto& [name, s] : streams.streams()) streams_j[name] = s.state();
    return nlohmann::json{{"evals_done", evals_done},
                          {"evals_at_last_fit", evals_at_last_fit},
                          {"encoder_version", q.encoder_version},
                          {"pending", pending},
                          {"q", qj},
                          {"streams", streams_j},
                          {"best_valid", best.valid},
                          {"best_theta", best.theta},
                          {"best_F", best.F},
                          {"best_success", best.success}};
  }

  void restore(const nlohmann::json& j) {
    evals_done = j.at("evals_done").get<int>();
    evals_at_last_fit = j.at("evals_at_last_fit").get<int>();
    q.encoder_version = j.at("encoder_version").get<int>();
    pending = j.at("pending").get<std::vector<std::vector<double>>>();
    q.entries.clear();
    for (const auto& ej : j.at("q")) {
      BOEntry e;
      e.f = ej.at("f").get<std::vector<double>>();
      e.F = ej.at("F").get<double>();
      e.theta = ej.at("theta").get<std::vector<double>>();
      e.p = ej.at("p").get<std::vector<double>>();
      e.encoder_version = ej.at("encoder_version").get<int>();
      q.entries.push_back(std::move(e));
    }
    for (const auto& [name, state] : j.at("streams").items()) {
      streams.restore(name, state.get<std::uint64_t>());
    }
    best.valid = j.at("best_valid").get<bool>();
    best.theta = j.at("best_theta").get<std::vector<double>>();
    best.F = j.at("best_F").get<double>();
    best.success = j.at("best_success").get<double>();
  }
};

void save_labo_checkpoint(const RunConfig& cfg, const LaboState& st,
                          const nlohmann::json& pretrain_record,
                          const std::vector<nlohmann::json>& records) {
  const fs::path dir = fs::path(cfg.out_dir) / "checkpoint";
  fs::create_directories(dir);
  save_checkpoint(st.model, st.trainer, (dir / "model.bin").string());
  nlohmann::json state{{"type", "labo-checkpoint"},
                       {"config", cfg.to_json()},
                       {"state", st.to_json()},
                       {"pretrain_record", pretrain_record},
                       {"records", records},
                       {"model_hash", hex64(file_content_hash((dir / "model.bin").string()))}};
  std::ofstream out(dir / "state.json");
  out << state.dump() << "\n";
}

std::vector<std::vector<double>> sample_pretrain_data(const RunConfig& cfg,
                                                      StreamRegistry& streams) {
  RngStream& rng = streams.get("pretrain-data");
  std::vector<std::vector<double>> d(cfg.n_pre, std::vector<double>(kParamDim));
  for (auto& row : d) {
    for (auto& v : row) v = rng.uniform01();
  }
  return d;
}

}  // namespace

RunResult run(const RunConfig& cfg, bool resume) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  TaskSuite suite = cfg.suite_manifest.empty()
                        ? TaskSuite::procedural(cfg.n_tasks, cfg.suite_seed)
                        : TaskSuite::load(cfg.suite_manifest);
  fs::create_directories(cfg.out_dir);
  suite.save(cfg.out_dir + "/suite.json");
  const int n_train = suite.count(false);

  const ScoreParams sp = score_params_from(cfg);
  std::vector<std::unique_ptr<ScoreReport>> slots(std::max(cfg.budget, 1));
  Evaluator evaluate{&cfg, &suite, sp, &slots};

  RunResult result;
  result.config = cfg;
  RunWriter writer(cfg, suite);

  auto push_record = [&](int iteration, const std::vector<double>& theta,
                         const std::vector<double>& f, BestTracker& best) {
    const ScoreReport& rep = *slots[iteration];
    best.consider(theta, rep.F, rep.overall_success_rate);
    EvalRecord r;
    r.iteration = iteration;
    r.theta = theta;
    r.f = f;
    r.F = rep.F;
    r.cost = rep.cost;
    r.rejected = rep.rejected;
    r.p = rep.p;
    r.best_F = best.F;
    r.best_success = best.success;
    r.wall_ms = elapsed_ms(t_start);
    result.records.push_back(r);
    writer.write_iteration(r);
  };

  if (cfg.optimizer != "labo") {
    writer.start_fresh();
    BestTracker best;
    SearchResult sr;
    if (cfg.budget > 0) {
      if (cfg.optimizer == "uniform") {
        sr = uniform_search(cfg.budget, cfg.seed, evaluate, static_cast<int>(kParamDim));
      } else if (cfg.optimizer == "cmaes") {
        CmaParams cp;
        cp.lambda = cfg.lambda;
        cp.sigma0 = cfg.sigma0;
        sr = cmaes_search(cfg.budget, cfg.seed, evaluate, static_cast<int>(kParamDim), cp);
      } else if (cfg.optimizer == "raw_bo") {
        BoParams bp;
        bp.beta = cfg.beta;
        bp.fit.restarts = cfg.fit_restarts;
        bp.fit.ascent_steps = cfg.fit_ascent_steps;
        bp.fit.nu = cfg.nu;
        bp.propose.n_candidates = cfg.candidates;
        bp.propose.n_raw = cfg.acq_raw_samples;
        bp.propose.n_restarts = cfg.acq_restarts;
        bp.propose.refine_steps = cfg.acq_refine_steps;
        bp.propose.sign = cfg.acq_sign == "paper" ? AcqSign::kPaper : AcqSign::kDefault;
        sr = raw_bo_search(cfg.budget, cfg.seed, evaluate, static_cast<int>(kParamDim), bp);
      } else {
        throw ConfigError("unknown optimizer: " + cfg.optimizer);
      }
      for (std::size_t i = 0; i < sr.trace.size(); ++i) {
        push_record(static_cast<int>(i), evaluate.masked(sr.trace[i].x), {}, best);
      }
    }
    if (best.valid) {
      result.best_theta = best.theta;
      result.best_F = best.F;
      auto [train, test] = evaluate_design(ParamVector(best.theta), suite, cfg.suite_seed, sp);
      result.train_report = train;
      result.test_report = test;
    }
    writer.finalize(&result, suite);
    return result;
  }

  // ---- LABO ----------------------------------------------------------------
  ArchDescriptor arch;
  arch.n_tasks = n_train;
  LaboState st;
  st.streams = StreamRegistry(cfg.seed);
  st.model = RepModel(arch);

  const fs::path ckpt_dir = fs::path(cfg.out_dir) / "checkpoint";
  bool resumed = false;
  if (resume) {
    const fs::path state_path = ckpt_dir / "state.json";
    if (!fs::exists(state_path)) throw ConfigError("no checkpoint to resume in " + cfg.out_dir);
    std::ifstream in(state_path);
    nlohmann::json state;
    in >> state;
    if (state.at("config") != cfg.to_json()) {
      throw ConfigError("resume config differs from the checkpointed run");
    }
    load_checkpoint(&st.model, &st.trainer, (ckpt_dir / "model.bin").string());
    st.restore(state.at("state"));
    result.pretrain_record = state.at("pretrain_record");
    std::vector<nlohmann::json> prior = state.at("records").get<std::vector<nlohmann::json>>();
    writer.resume_with(prior);
    for (const auto& rec : prior) {
      if (rec.value("type", "") == "iteration") result.records.push_back(record_from_json(rec));
    }
    resumed = true;
  } else {
    writer.start_fresh();
    st.trainer.resize_for(st.model);
    st.model.initialize(derive_seed(cfg.seed, "init"));
  }

  TrainOptions topts;
  topts.batch_size = cfg.batch_size;
  topts.adam.lr = cfg.lr;
  topts.loss.kl_weight = cfg.kl_weight;
  topts.loss.kl_direction =
      cfg.kl_direction == "standard" ? KlDirection::kStandard : KlDirection::kPaper;

  const std::vector<std::vector<double>> dataset = sample_pretrain_data(cfg, st.streams);
  LossWorkspace ws;

  if (!resumed) {
    const double mse_init = reconstruction_mse(st.model, dataset);
    const auto t_pre = std::chrono::steady_clock::now();
    const auto pre_log = pretrain(st.model, st.trainer, dataset, cfg.pretrain_steps, topts,
                                  st.streams.get("batch"), st.streams.get("epsilon"), &ws);
    const double mse_post = reconstruction_mse(st.model, dataset);
    nlohmann::json losses = nlohmann::json::array();
    for (const auto& e : pre_log) losses.push_back({{"step", e.step}, {"loss", e.loss}});
    result.pretrain_record = nlohmann::json{{"type", "pretrain"},
                                            {"steps", cfg.pretrain_steps},
                                            {"n_pre", cfg.n_pre},
                                            {"mse_init", mse_init},
                                            {"mse_final", mse_post},
                                            {"losses", losses},
                                            {"wall_ms", elapsed_ms(t_pre)}};
    writer.write_pretrain(result.pretrain_record);
    save_labo_checkpoint(cfg, st, result.pretrain_record, writer.records());
  }

  GpFitOptions fit_opts;
  fit_opts.restarts = cfg.fit_restarts;
  fit_opts.ascent_steps = cfg.fit_ascent_steps;
  fit_opts.nu = cfg.nu;
  ProposeOptions prop_opts;
  prop_opts.n_candidates = cfg.candidates;
  prop_opts.n_raw = cfg.acq_raw_samples;
  prop_opts.n_restarts = cfg.acq_restarts;
  prop_opts.refine_steps = cfg.acq_refine_steps;
  prop_opts.sign = cfg.acq_sign == "paper" ? AcqSign::kPaper : AcqSign::kDefault;

  GpModel gp;
  const int latent = st.model.arch().latent;

  while (st.evals_done < cfg.budget) {
    if (st.pending.empty()) {
      if (static_cast<int>(st.q.entries.size()) >= 2) {
        const bool refit_due = st.evals_at_last_fit < 0 ||
                               st.evals_done - st.evals_at_last_fit >= cfg.refit_interval;
        if (refit_due) {
          // Fine-tuning moved the encoder: refresh stale latents, then fit.
          st.q.encoder_version += 1;
          for (auto& e : st.q.entries) {
            e.f = st.model.encode_deterministic(e.theta);
            e.encoder_version = st.q.encoder_version;
          }
          std::vector<std::vector<double>> inputs;
          std::vector<double> targets;
          inputs.reserve(st.q.entries.size());
          for (const auto& e : st.q.entries) {
            inputs.push_back(e.f);
            targets.push_back(e.F);
          }
          gp.fit(inputs, targets, fit_opts, st.streams.get("gp-fit"));
          st.evals_at_last_fit = st.evals_done;
        }
        if (gp.fitted()) {
          st.pending = propose(gp, cfg.beta, latent, prop_opts, st.streams.get("acquisition"));
        }
      }
      if (st.pending.empty()) {
        // Bootstrap: not enough data for a surrogate yet.
        std::vector<double> f(latent);
        RngStream& rng = st.streams.get("acquisition");
        for (auto& v : f) v = rng.uniform01();
        st.pending.push_back(std::move(f));
      }
    }

    const std::vector<double> f = st.pending.front();
    st.pending.erase(st.pending.begin());

    const std::vector<double> theta_hat = st.model.decode_latent(f);
    const int i = st.evals_done;
    evaluate(theta_hat, static_cast<std::size_t>(i));
    const ScoreReport& rep = *slots[i];

    BOEntry entry;
    entry.f = f;
    entry.F = rep.F;
    entry.theta = theta_hat;
    entry.p.assign(rep.p.begin(), rep.p.end());
    entry.encoder_version = st.q.encoder_version;
    st.q.entries.push_back(std::move(entry));

    std::vector<LabeledDesign> labeled;
    labeled.reserve(st.q.entries.size());
    for (const auto& e : st.q.entries) labeled.push_back({e.theta, e.p, e.F});
    finetune(st.model, st.trainer, labeled, dataset, cfg.finetune_steps, topts,
             st.streams.get("batch"), st.streams.get("epsilon"), &ws);

    push_record(i, theta_hat, f, st.best);
    st.evals_done += 1;

    if (cfg.checkpoint_every > 0 &&
        (st.evals_done % cfg.checkpoint_every == 0 || st.evals_done == cfg.budget)) {
      save_labo_checkpoint(cfg, st, result.pretrain_record, writer.records());
    }
  }

  if (st.best.valid) {
    result.best_theta = st.best.theta;
    result.best_F = st.best.F;
    auto [train, test] = evaluate_design(ParamVector(st.best.theta), suite, cfg.suite_seed, sp);
    result.train_report = train;
    result.test_report = test;
  }
  writer.finalize(&result, suite);
  return result;
}

}  // namespace labo
