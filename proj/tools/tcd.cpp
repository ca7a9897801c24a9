#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "tcd/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  // explicit flag storage; only applied when the user passed them
  std::string env, flags, schedule;
  std::uint64_t seed = 0;
  int top_y = 0;
  double offset = 0.0, omega = 0.0;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config_path, "config file (key = value lines)");
  app->add_option("--set", a.sets, "extra key=value overrides")->take_all();
  app->add_option("--seed", a.seed, "master seed");
  app->add_option("--env", a.env, "env kind: historical|immediate|prospective");
  app->add_option("--flags", a.flags, "ablation presets, '|'-separated");
  app->add_option("--top-y", a.top_y, "top-Y reward profile size");
  app->add_option("--offset", a.offset, "max return offset");
  app->add_option("--omega", a.omega, "guidance scale");
  app->add_option("--schedule", a.schedule, "noise schedule: cosine|linear");
}

tcd::RunConfig build_config(const CLI::App* app, const CommonArgs& a) {
  tcd::RunConfig cfg;
  if (!a.config_path.empty()) cfg = tcd::load_config(a.config_path);
  if (app->count("--seed")) cfg.seed = a.seed;
  if (app->count("--env")) cfg.env = a.env;
  if (app->count("--flags")) cfg.flags = a.flags;
  if (app->count("--top-y")) cfg.top_y = a.top_y;
  if (app->count("--offset")) cfg.max_return_offset = a.offset;
  if (app->count("--omega")) cfg.omega = a.omega;
  if (app->count("--schedule")) cfg.schedule = a.schedule;
  for (const std::string& kv : a.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw tcd::UsageError("--set expects key=value, got '" + kv + "'");
    tcd::apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporally-conditioned sequence diffuser"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, export_args;
  std::string gen_out = "dataset.bin", gen_csv;
  std::string train_dataset, train_ckpt = "checkpoint.bin", train_log = "run.log";
  std::string eval_ckpt, eval_dataset, eval_out = "eval_out";
  std::string export_in, export_out = "export_out", export_format = "csv";

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic env dataset");
  add_common(gen, gen_args);
  gen->add_option("--out", gen_out, "output dataset file");
  gen->add_option("--csv-dir", gen_csv, "also write per-trajectory CSVs here");

  CLI::App* train = app.add_subcommand("train", "train denoiser + inverse dynamics");
  add_common(train, train_args);
  train->add_option("--dataset", train_dataset, "input dataset file")->required();
  train->add_option("--out", train_ckpt, "output checkpoint file");
  train->add_option("--log", train_log, "run log path (ndjson)");

  CLI::App* eval = app.add_subcommand("eval", "closed-loop evaluation of a checkpoint");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--dataset", eval_dataset, "dataset file (for the reward profile)")->required();
  eval->add_option("--out", eval_out, "output directory");

  CLI::App* exp = app.add_subcommand("export", "export a dataset or eval report to CSV");
  add_common(exp, export_args);
  exp->add_option("--in", export_in, "dataset file or eval report")->required();
  exp->add_option("--format", export_format, "output format (csv)");
  exp->add_option("--out", export_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      tcd::cmd_gen_data(build_config(gen, gen_args), gen_out, gen_csv);
    } else if (train->parsed()) {
      tcd::cmd_train(build_config(train, train_args), train_dataset, train_ckpt, train_log);
    } else if (eval->parsed()) {
      tcd::cmd_eval(build_config(eval, eval_args), eval_ckpt, eval_dataset, eval_out);
    } else if (exp->parsed()) {
      tcd::cmd_export(build_config(exp, export_args), export_in, export_format, export_out);
    }
  } catch (const tcd::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
