#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "evidx/counterfactual.hpp"
#include "evidx/io.hpp"
#include "evidx/labeler.hpp"
#include "evidx/phantom.hpp"
#include "evidx/plot.hpp"
#include "evidx/split.hpp"
#include "evidx/summarize.hpp"
#include "evidx/sweep.hpp"
#include "evidx/train.hpp"
#include "evidx/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evidx;

namespace {

struct TrainArgs {
  std::string strategy = "random";
  std::string data_dir;
  std::string labels_path;
  std::string config_path;
  std::string init_from;
  std::string input_mode;
  std::string out_dir;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  double lambda = 1.0;
  int epochs = -1;
  int epochs_pretrain = -1;
  int batch_size = -1;
  double lr = -1.0;
  bool freeze_aux = false;
  bool zero_aux = false;
  bool use_mci_aux = false;
};

TrainConfig load_train_config(const TrainArgs& args, const CLI::App* cmd) {
  TrainConfig cfg;
  if (!args.config_path.empty())
    cfg = TrainConfig::from_json(io::read_text_file(args.config_path));
  auto passed = [&](const std::string& flag) { return cmd->count(flag) > 0; };
  if (passed("--strategy")) cfg.strategy = strategy_from_string(args.strategy);
  if (passed("--seed")) cfg.seed = args.seed;
  if (passed("--fraction")) cfg.data_fraction = args.fraction;
  if (passed("--lambda")) cfg.lambda_mc = args.lambda;
  if (passed("--epochs")) cfg.epochs = args.epochs;
  if (passed("--epochs-pretrain")) cfg.epochs_pretrain = args.epochs_pretrain;
  if (passed("--batch-size")) cfg.batch_size = args.batch_size;
  if (passed("--lr")) cfg.learning_rate = args.lr;
  if (passed("--input-mode")) cfg.input_mode = input_mode_from_string(args.input_mode);
  if (passed("--init-from")) cfg.init_checkpoint = args.init_from;
  if (passed("--freeze-aux")) cfg.freeze_aux = args.freeze_aux;
  if (passed("--zero-aux")) cfg.zero_aux = args.zero_aux;
  if (passed("--use-mci-aux")) cfg.use_mci_in_aux = args.use_mci_aux;
  cfg.validate();
  std::cerr << "config: strategy=" << to_string(cfg.strategy) << " seed=" << cfg.seed
            << " fraction=" << cfg.data_fraction << " lambda=" << cfg.lambda_mc
            << " epochs=" << cfg.epochs << "/" << cfg.epochs_pretrain
            << " batch=" << cfg.batch_size << " lr=" << cfg.learning_rate << "\n";
  return cfg;
}

LabelMap load_labels_if_any(const std::string& path) {
  if (path.empty()) return {};
  return io::read_labels(path);
}

void write_run_outputs(const fs::path& out_dir, const TrainConfig& cfg,
                       const TrainResult& result, const std::string& data_dir,
                       const std::string& labels_path) {
  fs::create_directories(out_dir);
  Checkpoint ckpt{result.model_config, result.params, std::nullopt};
  write_checkpoint(out_dir / "checkpoint.bin", ckpt);
  io::write_text_file(out_dir / "metrics.json", metrics_json(result, cfg));
  json manifest = {{"version", kVersion},
                   {"git", kGitHash},
                   {"created_unix", long(std::time(nullptr))},
                   {"wall_seconds", result.wall_seconds},
                   {"data_dir", fs::absolute(data_dir).string()},
                   {"labels_path",
                    labels_path.empty() ? "" : fs::absolute(labels_path).string()},
                   {"train_config", json::parse(cfg.to_json())},
                   {"model_config", json::parse(result.model_config.to_json())},
                   {"checkpoint", "checkpoint.bin"},
                   {"metrics", "metrics.json"}};
  io::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "strategy=" << to_string(cfg.strategy) << " seed=" << cfg.seed
            << " test_accuracy=" << result.test_metrics.accuracy
            << " test_auroc=" << result.test_metrics.auroc << "\n";
}

std::vector<const Case*> select_split_cases(const std::vector<Case>& cases,
                                            const std::vector<std::string>& ids) {
  std::map<std::string, const Case*> by_id;
  for (const auto& c : cases) by_id[c.id] = &c;
  std::vector<const Case*> out;
  for (const auto& id : ids) out.push_back(by_id.at(id));
  return out;
}

int run_reproduce(const std::string& run_dir) {
  json manifest = json::parse(io::read_text_file(fs::path(run_dir) / "manifest.json"));
  TrainConfig cfg = TrainConfig::from_json(manifest.at("train_config").dump());
  const std::string data_dir = manifest.at("data_dir").get<std::string>();
  const std::string labels_path = manifest.at("labels_path").get<std::string>();
  auto cases = io::read_dataset(data_dir);
  auto atlas = io::read_dataset_atlas(data_dir);
  LabelMap labels = load_labels_if_any(labels_path);
  TrainResult result = train_strategy(cases, atlas, labels, cfg);
  const std::string fresh = metrics_json(result, cfg);
  const std::string recorded =
      io::read_text_file(fs::path(run_dir) / manifest.at("metrics").get<std::string>());
  if (fresh == recorded) {
    std::cout << "reproduce: metrics identical\n";
    return 0;
  }
  std::cerr << "reproduce: metrics differ from the recorded run\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* env = std::getenv("EVIDX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  CLI::App app{"evidx: morphology-label transfer-learning workbench"};
  app.set_version_flag("--version", std::string(kVersion) + " (" + kGitHash + ")");
  app.require_subcommand(1);

  // ---- phantom ----
  auto* cmd_phantom = app.add_subcommand("phantom", "generate a synthetic dataset");
  std::string ph_spec, ph_out;
  int ph_nc = -1, ph_mci = -1, ph_ad = -1;
  std::int64_t ph_seed = -1;
  cmd_phantom->add_option("--spec", ph_spec, "phantom spec JSON (built-in default)");
  cmd_phantom->add_option("--out", ph_out, "output dataset directory")->required();
  cmd_phantom->add_option("--nc", ph_nc, "NC case count override");
  cmd_phantom->add_option("--mci", ph_mci, "MCI case count override");
  cmd_phantom->add_option("--ad", ph_ad, "AD case count override");
  cmd_phantom->add_option("--seed", ph_seed, "spec seed override");

  // ---- label ----
  auto* cmd_label = app.add_subcommand("label", "derive severity labels from measures");
  std::string lb_data, lb_atlas, lb_out, lb_thresholds, lb_pool = "train-mci";
  int lb_min_group = kDefaultMinGroupSize;
  double lb_bin_years = kDefaultAgeBinYears;
  std::uint64_t lb_seed = 0;
  cmd_label->add_option("--data", lb_data, "dataset directory")->required();
  cmd_label->add_option("--atlas", lb_atlas, "atlas JSON (default: <data>/atlas.json)");
  cmd_label->add_option("--out", lb_out, "output label JSON")->required();
  cmd_label->add_option("--thresholds", lb_thresholds,
                        "threshold report CSV (default: alongside --out)");
  cmd_label->add_option("--min-group-size", lb_min_group,
                        "per-class group size needed before the pooled fallback");
  cmd_label->add_option("--bin-years", lb_bin_years, "age bin width in years");
  cmd_label->add_option("--pool", lb_pool, "threshold pool: train-mci or all")
      ->check(CLI::IsMember({"train-mci", "all"}));
  cmd_label->add_option("--seed", lb_seed, "split seed for the train-mci pool");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "train one strategy");
  TrainArgs ta;
  cmd_train->add_option("--strategy", ta.strategy, "training strategy")
      ->check(CLI::IsMember({"random", "pretrained", "eap", "eat", "eai"}));
  cmd_train->add_option("--data", ta.data_dir, "dataset directory")->required();
  cmd_train->add_option("--labels", ta.labels_path, "severity label JSON");
  cmd_train->add_option("--config", ta.config_path, "train config JSON");
  cmd_train->add_option("--seed", ta.seed, "run seed");
  cmd_train->add_option("--fraction", ta.fraction, "training data fraction");
  cmd_train->add_option("--lambda", ta.lambda, "aux-loss weight");
  cmd_train->add_option("--epochs", ta.epochs, "detection epochs");
  cmd_train->add_option("--epochs-pretrain", ta.epochs_pretrain, "aux-phase epochs");
  cmd_train->add_option("--batch-size", ta.batch_size, "batch size");
  cmd_train->add_option("--lr", ta.lr, "base learning rate");
  cmd_train->add_option("--input-mode", ta.input_mode, "masked, raw or per_region")
      ->check(CLI::IsMember({"masked", "raw", "per_region"}));
  cmd_train->add_option("--init-from", ta.init_from, "checkpoint for pretrained init");
  cmd_train->add_flag("--freeze-aux", ta.freeze_aux, "freeze the aux encoder in stage two");
  cmd_train->add_flag("--zero-aux", ta.zero_aux, "ablation: zero the aux features");
  cmd_train->add_flag("--use-mci-aux", ta.use_mci_aux, "admit MCI cases to aux batches");
  cmd_train->add_option("--out", ta.out_dir, "run output directory")->required();

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  std::string ev_ckpt, ev_data, ev_split = "test", ev_out;
  std::uint64_t ev_seed = 0;
  cmd_eval->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  cmd_eval->add_option("--data", ev_data, "dataset directory")->required();
  cmd_eval->add_option("--split", ev_split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}));
  cmd_eval->add_option("--seed", ev_seed, "split seed");
  cmd_eval->add_option("--out", ev_out, "metrics JSON output");

  // ---- counterfactual ----
  auto* cmd_cf = app.add_subcommand("counterfactual", "evidence-corruption test");
  std::string cf_ckpt, cf_data, cf_labels, cf_out;
  std::uint64_t cf_seed = 0, cf_noise_seed = 0;
  double cf_sigma = 1.0, cf_bin = 0.02;
  bool cf_noise_seed_set = false;
  cmd_cf->add_option("--checkpoint", cf_ckpt, "model checkpoint")->required();
  cmd_cf->add_option("--data", cf_data, "dataset directory")->required();
  cmd_cf->add_option("--labels", cf_labels, "severity label JSON")->required();
  cmd_cf->add_option("--seed", cf_seed, "split seed");
  cmd_cf->add_option("--noise-seed", cf_noise_seed, "corruption noise seed")
      ->each([&](const std::string&) { cf_noise_seed_set = true; });
  cmd_cf->add_option("--sigma", cf_sigma, "noise scale relative to intensity std");
  cmd_cf->add_option("--bin-width", cf_bin, "histogram bin width");
  cmd_cf->add_option("--out", cf_out, "output directory")->required();

  // ---- sweep ----
  auto* cmd_sweep = app.add_subcommand("sweep", "data-efficiency sweep");
  std::string sw_data, sw_labels, sw_config, sw_out;
  std::vector<std::string> sw_strategies{"random", "eap", "eat", "eai"};
  std::vector<double> sw_fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<std::uint64_t> sw_seeds{0, 1, 2};
  cmd_sweep->add_option("--data", sw_data, "dataset directory")->required();
  cmd_sweep->add_option("--labels", sw_labels, "severity label JSON")->required();
  cmd_sweep->add_option("--config", sw_config, "train config JSON");
  cmd_sweep->add_option("--strategies", sw_strategies, "strategies to sweep")->delimiter(',');
  cmd_sweep->add_option("--fractions", sw_fractions, "training fractions")->delimiter(',');
  cmd_sweep->add_option("--seeds", sw_seeds, "seeds")->delimiter(',');
  cmd_sweep->add_option("--out", sw_out, "output directory")->required();

  // ---- summarize ----
  auto* cmd_sum = app.add_subcommand("summarize", "average per-variant reports");
  std::string su_reports, su_out;
  cmd_sum->add_option("--reports", su_reports, "CSV: method,variant,accuracy,auroc,is_baseline")
      ->required();
  cmd_sum->add_option("--out", su_out, "averaged table CSV")->required();

  // ---- plot ----
  auto* cmd_plot = app.add_subcommand("plot", "render SVG charts from result CSVs");
  std::string pl_sweep, pl_hist, pl_out;
  cmd_plot->add_option("--sweep", pl_sweep, "sweep results CSV");
  cmd_plot->add_option("--histogram", pl_hist, "counterfactual histogram CSV");
  cmd_plot->add_option("--out", pl_out, "output SVG")->required();

  // ---- reproduce ----
  auto* cmd_repro = app.add_subcommand("reproduce", "re-run a manifest and diff metrics");
  std::string rp_dir;
  cmd_repro->add_option("rundir", rp_dir, "run directory with manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << '\n' << app.help() << '\n';
    return 2;
  }

  try {
    if (cmd_phantom->parsed()) {
      PhantomSpec spec =
          ph_spec.empty() ? default_phantom_spec() : phantom_spec_from_json_file(ph_spec);
      if (ph_seed >= 0) spec.seed = std::uint64_t(ph_seed);
      const int n_nc = ph_nc >= 0 ? ph_nc : spec.n_nc;
      const int n_mci = ph_mci >= 0 ? ph_mci : spec.n_mci;
      const int n_ad = ph_ad >= 0 ? ph_ad : spec.n_ad;
      auto cases = generate_dataset(spec, n_nc, n_mci, n_ad);
      io::write_dataset(ph_out, cases, atlas_from_spec(spec));
      spec.n_nc = n_nc;
      spec.n_mci = n_mci;
      spec.n_ad = n_ad;
      write_phantom_spec(fs::path(ph_out) / "phantom_spec.json", spec);
      std::cout << "wrote " << cases.size() << " cases to " << ph_out << "\n";
    } else if (cmd_label->parsed()) {
      auto cases = io::read_dataset(lb_data);
      AtlasConfig atlas = lb_atlas.empty() ? io::read_dataset_atlas(lb_data)
                                           : io::read_atlas(lb_atlas);
      std::vector<std::string> pool;
      if (lb_pool == "train-mci") {
        DatasetSplit split = split_dataset(cases, lb_seed);
        pool = split.train;
        for (const auto& c : cases)
          if (c.diagnosis == Diagnosis::MCI) pool.push_back(c.id);
      }
      LabelMap labels = label_dataset(cases, atlas, lb_min_group, pool, lb_bin_years);
      io::write_labels(lb_out, labels);
      // the audit trail mirrors exactly what label_dataset derived
      std::vector<Case> pool_cases;
      if (pool.empty()) {
        pool_cases = cases;
      } else {
        std::set<std::string> wanted(pool.begin(), pool.end());
        for (const auto& c : cases)
          if (wanted.count(c.id)) pool_cases.push_back(c);
      }
      auto groups = group_cases(pool_cases, lb_bin_years);
      auto stats = compute_group_statistics(pool_cases, groups, atlas);
      auto table = derive_thresholds(stats, atlas, lb_min_group);
      const fs::path report = lb_thresholds.empty()
                                  ? fs::path(lb_out).replace_extension(".thresholds.csv")
                                  : fs::path(lb_thresholds);
      write_threshold_report(report, table);
      std::cout << "labeled " << labels.size() << " cases (pool=" << lb_pool << ")\n";
    } else if (cmd_train->parsed()) {
      TrainConfig cfg = load_train_config(ta, cmd_train);
      auto cases = io::read_dataset(ta.data_dir);
      auto atlas = io::read_dataset_atlas(ta.data_dir);
      LabelMap labels = load_labels_if_any(ta.labels_path);
      TrainResult result = train_strategy(cases, atlas, labels, cfg);
      write_run_outputs(ta.out_dir, cfg, result, ta.data_dir, ta.labels_path);
    } else if (cmd_eval->parsed()) {
      Checkpoint ckpt = read_checkpoint(ev_ckpt);
      Network net(ckpt.config);
      auto cases = io::read_dataset(ev_data);
      auto atlas = io::read_dataset_atlas(ev_data);
      DatasetSplit split = split_dataset(cases, ev_seed);
      const auto& ids = ev_split == "train" ? split.train
                        : ev_split == "val" ? split.val
                                            : split.test;
      auto subset = select_split_cases(cases, ids);
      std::vector<Prediction> preds;
      std::vector<Diagnosis> truths;
      std::vector<double> scores;
      for (const Case* c : subset) {
        auto input = build_model_input(*c, atlas, ckpt.config);
        preds.push_back(net.predict(input, ckpt.params));
        truths.push_back(c->diagnosis);
        scores.push_back(preds.back().p_ad[1]);
      }
      json doc = {{"split", ev_split},
                  {"seed", ev_seed},
                  {"n_cases", preds.size()},
                  {"accuracy", accuracy(preds, truths)},
                  {"auroc", auroc(scores, truths)}};
      const std::string text = doc.dump(2) + "\n";
      if (ev_out.empty())
        std::cout << text;
      else
        io::write_text_file(ev_out, text);
    } else if (cmd_cf->parsed()) {
      Checkpoint ckpt = read_checkpoint(cf_ckpt);
      Network net(ckpt.config);
      auto cases = io::read_dataset(cf_data);
      auto atlas = io::read_dataset_atlas(cf_data);
      LabelMap labels = io::read_labels(cf_labels);
      DatasetSplit split = split_dataset(cases, cf_seed);
      auto subset = select_split_cases(cases, split.test);
      const std::uint64_t noise_seed = cf_noise_seed_set ? cf_noise_seed : cf_seed;
      auto result = counterfactual_test(net, ckpt.params, subset, atlas, labels, cf_sigma,
                                        noise_seed, cf_bin);
      fs::create_directories(cf_out);
      write_counterfactual_pairs_csv(fs::path(cf_out) / "pairs.csv", result);
      write_counterfactual_histogram_csv(fs::path(cf_out) / "histogram.csv", result);
      std::cout << "pairs=" << result.pairs.size() << " first_bin=" << result.first_bin()
                << "\n";
    } else if (cmd_sweep->parsed()) {
      TrainConfig base;
      if (!sw_config.empty()) base = TrainConfig::from_json(io::read_text_file(sw_config));
      base.validate();
      auto cases = io::read_dataset(sw_data);
      auto atlas = io::read_dataset_atlas(sw_data);
      LabelMap labels = io::read_labels(sw_labels);
      std::vector<Strategy> strategies;
      for (const auto& s : sw_strategies) strategies.push_back(strategy_from_string(s));
      SweepResult result = data_efficiency_sweep(cases, atlas, labels, base, strategies,
                                                 sw_fractions, sw_seeds);
      fs::create_directories(sw_out);
      write_sweep_csv(fs::path(sw_out) / "results.csv", result);
      write_sweep_plotdata(fs::path(sw_out) / "plotdata.json", result);
      std::cout << "sweep cells=" << result.cells.size()
                << " reference=" << result.reference_strategy << " acc "
                << result.reference_accuracy << "\n";
    } else if (cmd_sum->parsed()) {
      auto rows = read_backbone_reports_csv(su_reports);
      auto averages = summarize_results(rows);
      write_method_averages_csv(su_out, averages);
      std::cout << "summarized " << rows.size() << " rows into " << averages.size()
                << " methods\n";
    } else if (cmd_plot->parsed()) {
      if (pl_sweep.empty() == pl_hist.empty())
        throw ConfigError("pass exactly one of --sweep or --histogram");
      if (!pl_sweep.empty())
        render_sweep_svg(pl_sweep, pl_out);
      else
        render_histogram_svg(pl_hist, pl_out);
      std::cout << "wrote " << pl_out << "\n";
    } else if (cmd_repro->parsed()) {
      return run_reproduce(rp_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
