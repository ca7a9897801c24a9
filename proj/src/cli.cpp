#include "tcd/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "tcd/agent.hpp"
#include "tcd/checkpoint.hpp"
#include "tcd/train.hpp"

namespace tcd {

namespace fs = std::filesystem;
using nlohmann::json;

AblationFlags flags_from_preset(const std::string& name) {
  if (name == "tcd") return {true, true, true};
  if (name == "rtg-ts") return {false, false, true};
  if (name == "hc-rtg-ts") return {true, false, true};
  if (name == "far-rtg-ts") return {false, true, true};
  throw UsageError("unknown flags preset '" + name + "' (expected tcd|rtg-ts|hc-rtg-ts|far-rtg-ts)");
}

std::vector<std::string> split_presets(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t bar = s.find('|', start);
    const std::string part = s.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (!part.empty()) out.push_back(part);
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  if (out.empty()) throw UsageError("empty flags preset list");
  return out;
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out_path, const std::string& csv_dir) {
  cfg.validate();
  const Dataset d = generate_dataset(cfg.env_kind(), cfg.n, cfg.h, cfg.sigma, cfg.seed);
  save_dataset(d, out_path);
  if (!csv_dir.empty()) {
    fs::create_directories(csv_dir);
    for (const Trajectory& tr : d.trajectories)
      export_trajectory_csv(d, tr, csv_dir + "/traj_" + std::to_string(tr.id) + ".csv");
  }
  std::printf("wrote %s: env=%s n=%d len=%d d_s=%d d_a=%d\n", out_path.c_str(), cfg.env.c_str(),
              static_cast<int>(d.trajectories.size()), d.t_max, d.d_s, d.d_a);
  std::printf("returns [%g, %g], rewards [%g, %g], t_max=%d\n", d.stats.T_min, d.stats.T_max,
              d.stats.r_min, d.stats.r_max, d.stats.t_max);
}

namespace {

void write_ndjson_log(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write run log: " + path);
  for (const TrainLogEntry& e : log) {
    json j{{"step", e.step}, {"loss", e.loss}, {"wall_ms", e.wall_ms}};
    os << j.dump() << "\n";
  }
}

}  // namespace

void cmd_train(const RunConfig& cfg, const std::string& dataset_path, const std::string& ckpt_path,
               const std::string& log_path) {
  cfg.validate();
  const Dataset dataset = load_dataset(dataset_path);
  if (dataset.d_s <= 0) throw std::runtime_error("train: dataset has no state dimensions");

  DenoiserConfig dcfg;
  dcfg.d_s = dataset.d_s;
  dcfg.levels = cfg.levels;
  dcfg.base_width = cfg.base_width;
  dcfg.kernel = cfg.kernel;
  dcfg.embed_dim = cfg.embed_dim;
  check_denoiser_input(dcfg, cfg.L);

  const NoiseSchedule sched = make_schedule(cfg.K, cfg.schedule_kind());
  GuidanceConfig gcfg;
  gcfg.omega = cfg.omega;
  gcfg.condition_dropout_p = cfg.condition_dropout_p;
  gcfg.clip_x0 = cfg.clip_x0;
  gcfg.variance_scaled_noise = cfg.variance_scaled_noise;

  TrainOptions topts;
  topts.steps = cfg.train_steps;
  topts.batch = cfg.batch;
  topts.lr = cfg.lr;
  topts.L = cfg.L;
  topts.t_hc = cfg.t_hc;
  topts.discard_padded = cfg.discard_padded;
  topts.flags = flags_from_preset(split_presets(cfg.flags).front());
  topts.raw_rtg = cfg.raw_rtg_condition;
  topts.log_every = cfg.log_every;

  std::vector<TrainLogEntry> dlog, ilog;
  const ParamSet theta = train_denoiser(dcfg, dataset, sched, gcfg, topts, cfg.seed, &dlog);

  InverseDynamicsConfig icfg;
  icfg.d_s = dataset.d_s;
  icfg.d_a = dataset.d_a;
  const ParamSet phi =
      train_inverse_dynamics(icfg, dataset, cfg.inv_steps, cfg.batch, cfg.lr, cfg.seed, &ilog);

  Checkpoint ckpt;
  ckpt.dcfg = dcfg;
  ckpt.icfg = icfg;
  ckpt.sched_kind = cfg.schedule_kind();
  ckpt.K = cfg.K;
  ckpt.gcfg = gcfg;
  ckpt.L = cfg.L;
  ckpt.t_hc = cfg.t_hc;
  ckpt.stats = dataset.stats;
  ckpt.theta = theta;
  ckpt.phi = phi;
  save_checkpoint(ckpt, ckpt_path);

  if (!log_path.empty()) {
    write_ndjson_log(dlog, log_path);
    write_ndjson_log(ilog, log_path + ".inv");
  }
  std::printf("wrote %s: first loss %.6f, final loss %.6f over %d steps\n", ckpt_path.c_str(),
              dlog.empty() ? 0.0 : dlog.front().loss, dlog.empty() ? 0.0 : dlog.back().loss,
              cfg.train_steps);
}

void cmd_eval(const RunConfig& cfg, const std::string& ckpt_path, const std::string& dataset_path,
              const std::string& out_dir) {
  cfg.validate();
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset dataset = load_dataset(dataset_path);
  if (cfg.K != ckpt.K || cfg.schedule_kind() != ckpt.sched_kind)
    throw std::runtime_error("eval: checkpoint/schedule mismatch (config K=" + std::to_string(cfg.K) +
                             "/" + cfg.schedule + ", checkpoint K=" + std::to_string(ckpt.K) + "/" +
                             to_string(ckpt.sched_kind) + ")");
  if (dataset.d_s != ckpt.dcfg.d_s) throw std::runtime_error("eval: dataset/checkpoint dimension mismatch");

  const EnvSpec spec = EnvSpec::make(cfg.env_kind(), cfg.h, cfg.sigma);
  if (spec.t_max() != ckpt.stats.t_max)
    throw std::runtime_error("eval: env time limit differs from the checkpoint's dataset stats");

  const NoiseSchedule sched = make_schedule(ckpt.K, ckpt.sched_kind);
  GuidanceConfig gcfg = ckpt.gcfg;
  gcfg.omega = cfg.omega;  // sampling-time knob

  const std::vector<double> profile = top_y_reward_profile(dataset, cfg.top_y);
  fs::create_directories(out_dir);

  json report;
  report["env"] = cfg.env;
  report["seed"] = cfg.seed;
  report["top_y"] = cfg.top_y;
  report["omega"] = gcfg.omega;
  report["max_return_offset"] = cfg.max_return_offset;
  report["episodes"] = cfg.episodes;
  report["checkpoint"] = ckpt_path;
  report["presets"] = json::array();

  const std::vector<std::string> presets = split_presets(cfg.flags);
  std::vector<double> preset_means;
  for (std::size_t pi = 0; pi < presets.size(); ++pi) {
    EvalConfig ecfg;
    ecfg.L = ckpt.L;
    ecfg.t_hc = ckpt.t_hc;
    ecfg.max_return_offset = cfg.max_return_offset;
    ecfg.flags = flags_from_preset(presets[pi]);
    ecfg.raw_rtg = cfg.raw_rtg_condition;
    ecfg.start_class = cfg.start_class;

    const std::vector<EpisodeResult> results =
        evaluate_episodes(ckpt.dcfg, ckpt.theta, ckpt.icfg, ckpt.phi, spec, ckpt.stats, profile,
                          sched, gcfg, ecfg, cfg.episodes, substream(cfg.seed, 100 + pi));

    json jp;
    jp["name"] = presets[pi];
    jp["flags"] = {{"historical", ecfg.flags.use_historical},
                   {"immediate", ecfg.flags.use_immediate},
                   {"prospective", ecfg.flags.use_prospective}};
    jp["episodes"] = json::array();
    std::map<std::string, int> tally;
    double mean = 0.0;
    for (std::size_t e = 0; e < results.size(); ++e) {
      const EpisodeResult& r = results[e];
      json je{{"return", r.total_return},
              {"steps", r.steps},
              {"rtg_initial", r.rtg_initial},
              {"rtg_final", r.rtg_final},
              {"rewards", r.rewards}};
      if (r.steps >= spec.h + 2) {
        Tensor future({r.steps + 1 - spec.h, spec.d_s});
        for (int i = 0; i < future.dim(0); ++i)
          for (int j = 0; j < spec.d_s; ++j) future.at(i, j) = r.states.at(spec.h + i, j);
        const BranchLabel label = classify_branch(spec, future, spec.h);
        je["branch"] = label.name;
        tally[label.name] += 1;
      }
      jp["episodes"].push_back(je);
      mean += r.total_return;

      std::ofstream csv(out_dir + "/ep_" + presets[pi] + "_" + std::to_string(e) + ".csv");
      csv << "t";
      for (int j = 0; j < spec.d_s; ++j) csv << ",s_" << j;
      for (int j = 0; j < spec.d_a; ++j) csv << ",a_" << j;
      csv << ",r\n";
      char buf[64];
      for (int t = 0; t < r.steps; ++t) {
        csv << t;
        for (int j = 0; j < spec.d_s; ++j) {
          std::snprintf(buf, sizeof buf, ",%.17g", r.states.at(t, j));
          csv << buf;
        }
        for (int j = 0; j < spec.d_a; ++j) {
          std::snprintf(buf, sizeof buf, ",%.17g", r.actions.at(t, j));
          csv << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g\n", r.rewards[static_cast<std::size_t>(t)]);
        csv << buf;
      }
    }
    mean /= results.empty() ? 1.0 : static_cast<double>(results.size());
    jp["mean_return"] = mean;
    jp["branch_tally"] = tally;
    preset_means.push_back(mean);
    report["presets"].push_back(jp);
    std::printf("preset %-12s mean return %.4f over %d episodes\n", presets[pi].c_str(), mean,
                cfg.episodes);
  }

  if (preset_means.size() >= 2) {
    try {
      const std::vector<double> scores = normalized_score(preset_means);
      json js;
      for (std::size_t i = 0; i < presets.size(); ++i) js[presets[i]] = scores[i];
      report["normalized_scores"] = js;
    } catch (const std::exception& e) {
      report["normalized_scores_note"] = e.what();
    }
  }

  std::ofstream os(out_dir + "/report.json");
  if (!os) throw std::runtime_error("cannot write report under " + out_dir);
  os << report.dump(2) << "\n";
}

void cmd_export(const RunConfig& cfg, const std::string& input_path, const std::string& format,
                const std::string& out_dir) {
  if (format != "csv") throw UsageError("unknown export format '" + format + "' (only csv)");
  std::ifstream probe(input_path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open export input: " + input_path);
  char head[8] = {};
  probe.read(head, 8);
  probe.close();
  fs::create_directories(out_dir);

  if (std::string(head, 8) == "TCDDATA1") {
    const Dataset d = load_dataset(input_path);
    const EnvSpec spec = EnvSpec::make(cfg.env_kind(), d.t_max / 2, cfg.sigma);
    std::ofstream index(out_dir + "/index.csv");
    index << "id,label,episode_return,length";
    for (const std::string& name : spec.class_names) index << ",dist_" << name;
    index << "\n";
    char buf[64];
    for (const Trajectory& tr : d.trajectories) {
      export_trajectory_csv(d, tr, out_dir + "/traj_" + std::to_string(tr.id) + ".csv");
      Tensor future({tr.length() - spec.h, spec.d_s});
      for (int i = 0; i < future.dim(0); ++i)
        for (int j = 0; j < spec.d_s; ++j) future.at(i, j) = tr.states.at(spec.h + i, j);
      const BranchLabel label = classify_branch(spec, future, spec.h);
      const std::vector<double> dists = branch_distances(spec, future, spec.h);
      index << tr.id << "," << label.name;
      std::snprintf(buf, sizeof buf, ",%.17g,%d", tr.episode_return, tr.length());
      index << buf;
      for (double v : dists) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        index << buf;
      }
      index << "\n";
    }
    std::printf("exported %d trajectories to %s\n", static_cast<int>(d.trajectories.size()),
                out_dir.c_str());
    return;
  }

  // Otherwise expect an eval report.
  std::ifstream is(input_path);
  json report;
  try {
    is >> report;
  } catch (const json::exception&) {
    throw std::runtime_error("export input is neither a dataset file nor an eval report: " + input_path);
  }
  std::ofstream csv(out_dir + "/returns.csv");
  csv << "preset,episode,return,steps\n";
  char buf[64];
  for (const json& jp : report.at("presets")) {
    const std::string name = jp.at("name");
    int e = 0;
    for (const json& je : jp.at("episodes")) {
      std::snprintf(buf, sizeof buf, "%.17g", je.at("return").get<double>());
      csv << name << "," << e++ << "," << buf << "," << je.at("steps").get<int>() << "\n";
    }
  }
  std::printf("exported report returns to %s/returns.csv\n", out_dir.c_str());
}

}  // namespace tcd
