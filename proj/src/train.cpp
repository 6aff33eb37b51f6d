#include "evidx/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"

#include "evidx/optimizer.hpp"
#include "evidx/rng.hpp"
#include "evidx/split.hpp"

namespace evidx {

using nlohmann::json;

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::BaselineRandom: return "random";
    case Strategy::BaselinePretrained: return "pretrained";
    case Strategy::EaP: return "eap";
    case Strategy::EaT: return "eat";
    default: return "eai";
  }
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "random") return Strategy::BaselineRandom;
  if (s == "pretrained") return Strategy::BaselinePretrained;
  if (s == "eap") return Strategy::EaP;
  if (s == "eat") return Strategy::EaT;
  if (s == "eai") return Strategy::EaI;
  throw ConfigError("unknown strategy '" + s + "'");
}

void TrainConfig::validate() const {
  std::vector<std::string> bad;
  if (lambda_mc < 0.0) bad.push_back("lambda_mc must be >= 0");
  if (!(data_fraction > 0.0 && data_fraction <= 1.0))
    bad.push_back("data_fraction must lie in (0, 1]");
  if (epochs < 0) bad.push_back("epochs must be >= 0");
  if (epochs_pretrain < 0) bad.push_back("epochs_pretrain must be >= 0");
  if (batch_size < 1) bad.push_back("batch_size must be >= 1");
  if (learning_rate < 0.0) bad.push_back("learning_rate must be >= 0");
  if (strategy == Strategy::BaselinePretrained && init_checkpoint.empty())
    bad.push_back("init_checkpoint required for the pretrained strategy");
  if (!bad.empty()) {
    std::string msg = "invalid train config:";
    for (const auto& b : bad) msg += " [" + b + "]";
    throw ConfigError(msg);
  }
}

std::string TrainConfig::to_json() const {
  json stages = json::array();
  for (const auto& s : encoder.stages)
    stages.push_back({{"channels", s.channels}, {"kernel", s.kernel}, {"stride", s.stride}});
  json doc = {{"strategy", to_string(strategy)},
              {"lambda_mc", lambda_mc},
              {"epochs", epochs},
              {"epochs_pretrain", epochs_pretrain},
              {"seed", seed},
              {"data_fraction", data_fraction},
              {"batch_size", batch_size},
              {"learning_rate", learning_rate},
              {"encoder", {{"stages", stages}, {"variant", encoder.variant}}},
              {"input_mode", evidx::to_string(input_mode)},
              {"freeze_aux", freeze_aux},
              {"zero_aux", zero_aux},
              {"use_mci_in_aux", use_mci_in_aux},
              {"init_checkpoint", init_checkpoint}};
  return doc.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  TrainConfig cfg;
  cfg.strategy = strategy_from_string(doc.value("strategy", "random"));
  cfg.lambda_mc = doc.value("lambda_mc", 1.0);
  cfg.epochs = doc.value("epochs", 10);
  cfg.epochs_pretrain = doc.value("epochs_pretrain", 10);
  cfg.seed = doc.value("seed", std::uint64_t(0));
  cfg.data_fraction = doc.value("data_fraction", 1.0);
  cfg.batch_size = doc.value("batch_size", 16);
  cfg.learning_rate = doc.value("learning_rate", 1e-5);
  if (doc.contains("encoder")) {
    cfg.encoder.stages.clear();
    for (const auto& s : doc.at("encoder").at("stages"))
      cfg.encoder.stages.push_back({s.at("channels").get<int>(), s.at("kernel").get<int>(),
                                    s.at("stride").get<int>()});
    cfg.encoder.variant = doc.at("encoder").value("variant", "small3");
  }
  cfg.input_mode = input_mode_from_string(doc.value("input_mode", "masked"));
  cfg.freeze_aux = doc.value("freeze_aux", false);
  cfg.zero_aux = doc.value("zero_aux", false);
  cfg.use_mci_in_aux = doc.value("use_mci_in_aux", false);
  cfg.init_checkpoint = doc.value("init_checkpoint", "");
  return cfg;
}

namespace {

struct CaseTable {
  const std::vector<Case>* cases = nullptr;
  std::map<std::string, std::size_t> index;

  const Case& at(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw Error("unknown case id '" + id + "'");
    return (*cases)[it->second];
  }
};

struct InputCache {
  std::map<std::string, std::vector<double>> inputs;

  const std::vector<double>* get(const std::string& id) const { return &inputs.at(id); }
};

InputCache build_inputs(const CaseTable& table, const std::vector<std::string>& ids,
                        const AtlasConfig& atlas, const ModelConfig& mcfg) {
  InputCache cache;
  for (const auto& id : ids) cache.inputs.emplace(id, std::vector<double>());
  std::vector<const std::string*> order;
  order.reserve(ids.size());
  for (const auto& id : ids) order.push_back(&id);
  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)order.size(); ++i) {
    try {
      const std::string& id = *order[std::size_t(i)];
      cache.inputs.at(id) = build_model_input(table.at(id), atlas, mcfg);
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);
  return cache;
}

struct EvalSet {
  std::vector<const std::vector<double>*> inputs;
  std::vector<Diagnosis> truths;
  std::vector<const MCLabelSet*> mc;
};

EvalSet make_eval_set(const CaseTable& table, const InputCache& cache,
                      const std::vector<std::string>& ids, const LabelMap* labels) {
  EvalSet set;
  for (const auto& id : ids) {
    set.inputs.push_back(cache.get(id));
    set.truths.push_back(table.at(id).diagnosis);
    if (labels) {
      auto it = labels->find(id);
      set.mc.push_back(it == labels->end() ? nullptr : &it->second);
    }
  }
  return set;
}

std::vector<Prediction> predict_all(const Network& net, const std::vector<double>& params,
                                    const std::vector<const std::vector<double>*>& inputs) {
  std::vector<Prediction> preds(inputs.size());
  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)inputs.size(); ++i) {
    try {
      preds[std::size_t(i)] = net.predict(*inputs[std::size_t(i)], params);
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);
  return preds;
}

double mc_accuracy(const std::vector<Prediction>& preds,
                   const std::vector<const MCLabelSet*>& labels,
                   const std::vector<int>& k_codes) {
  long hits = 0, total = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t k = 0; k < k_codes.size(); ++k) {
      auto it = labels[i]->labels.find(k_codes[k]);
      if (it == labels[i]->labels.end()) continue;
      const auto& p = preds[i].mc[k];
      int argmax = 0;
      for (int j = 1; j < 3; ++j)
        if (p[std::size_t(j)] > p[std::size_t(argmax)]) argmax = j;
      hits += argmax == int(it->second) ? 1 : 0;
      total += 1;
    }
  }
  return total == 0 ? -1.0 : double(hits) / double(total);
}

struct PhaseSpec {
  std::string name;
  Objective objective = Objective::Detection;
  double lambda = 1.0;
  int epochs = 0;
  int batch_size = 16;
  double learning_rate = 1e-5;
  std::uint64_t order_stream = 0;
  bool freeze_aux = false;
  bool select_best_val = false;  // else: final-epoch parameters
};

PhaseRecord run_phase(const Network& net, std::vector<double>& params,
                      const std::vector<BatchExample>& train, const EvalSet& val,
                      const std::vector<int>& k_codes, const PhaseSpec& spec) {
  PhaseRecord record;
  record.name = spec.name;
  record.objective = spec.objective;
  if (spec.epochs == 0 || train.empty()) return record;

  const long steps_per_epoch =
      long((train.size() + std::size_t(spec.batch_size) - 1) / std::size_t(spec.batch_size));
  OneCycleSchedule schedule{spec.learning_rate, steps_per_epoch * spec.epochs};
  AdamState adam = make_adam_state(params.size());
  auto ws = net.make_workspace(std::size_t(spec.batch_size));
  std::vector<double> grad(params.size(), 0.0);
  Rng order_rng(spec.order_stream);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> best_params;
  double best_auroc = -1.0;
  long step = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_total = 0.0, epoch_det = 0.0, epoch_aux = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < train.size(); start += std::size_t(spec.batch_size)) {
      const std::size_t count = std::min(std::size_t(spec.batch_size), train.size() - start);
      std::vector<BatchExample> batch(count);
      for (std::size_t i = 0; i < count; ++i) batch[i] = train[order[start + i]];
      LossBreakdown loss = net.batch_loss_and_grad(params, batch, spec.objective,
                                                   spec.lambda, grad, ws, spec.freeze_aux);
      if (!std::isfinite(loss.total))
        throw DivergenceError("non-finite loss at step " + std::to_string(step) +
                              " of phase " + spec.name);
      adam_step(params, grad, adam, schedule.lr_at(step));
      record.step_losses.push_back(loss.total);
      epoch_total += loss.total;
      epoch_det += loss.detection;
      epoch_aux += loss.aux;
      ++batches;
      ++step;
    }
    EpochRecord er;
    er.epoch = epoch;
    er.train_total = epoch_total / double(batches);
    er.train_detection = epoch_det / double(batches);
    er.train_aux = epoch_aux / double(batches);
    if (!val.inputs.empty()) {
      auto preds = predict_all(net, params, val.inputs);
      if (spec.objective != Objective::Aux) {
        er.val_accuracy = accuracy(preds, val.truths);
        std::vector<double> scores(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) scores[i] = preds[i].p_ad[1];
        er.val_auroc = auroc(scores, val.truths);
        if (spec.select_best_val && er.val_auroc > best_auroc) {
          best_auroc = er.val_auroc;
          best_params = params;
          record.selected_epoch = epoch;
        }
      } else if (net.config().mc_heads && !val.mc.empty()) {
        er.val_mc_accuracy = mc_accuracy(preds, val.mc, k_codes);
      }
    }
    record.epochs.push_back(er);
  }
  if (spec.select_best_val && !best_params.empty()) params = std::move(best_params);
  return record;
}

std::vector<BatchExample> make_train_examples(const CaseTable& table,
                                              const InputCache& cache,
                                              const std::vector<std::string>& ids,
                                              const LabelMap* labels, bool need_labels) {
  std::vector<BatchExample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    BatchExample ex;
    ex.input = cache.get(id);
    ex.diagnosis = table.at(id).diagnosis;
    ex.mc = nullptr;
    if (labels) {
      auto it = labels->find(id);
      if (it != labels->end()) ex.mc = &it->second;
    }
    if (need_labels && !ex.mc)
      throw LabelError("case '" + id + "' has no severity label set");
    out.push_back(ex);
  }
  return out;
}

MetricsReport test_report(const Network& net, const std::vector<double>& params,
                          const EvalSet& test, const TrainConfig& cfg) {
  MetricsReport report;
  report.strategy = to_string(cfg.strategy);
  report.seed = cfg.seed;
  report.n_cases = long(test.inputs.size());
  for (Diagnosis d : test.truths) (d == Diagnosis::AD ? report.n_ad : report.n_nc) += 1;
  auto preds = predict_all(net, params, test.inputs);
  report.accuracy = accuracy(preds, test.truths);
  std::vector<double> scores(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) scores[i] = preds[i].p_ad[1];
  report.auroc = auroc(scores, test.truths);
  return report;
}

void zero_segments_with_prefix(const Network& net, std::vector<double>& params,
                               const std::string& prefix) {
  for (const auto& seg : net.segments()) {
    if (seg.name.rfind(prefix, 0) != 0) continue;
    std::fill_n(params.begin() + long(seg.offset), seg.count, 0.0);
  }
}

}  // namespace

TrainResult train_strategy(const std::vector<Case>& cases, const AtlasConfig& atlas,
                           const LabelMap& labels, const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  CaseTable table;
  table.cases = &cases;
  for (std::size_t i = 0; i < cases.size(); ++i) table.index[cases[i].id] = i;
  if (cases.empty()) throw InsufficientDataError("no cases supplied");

  const DatasetSplit split = split_dataset(cases, cfg.seed);
  auto diag_table = diagnosis_table(cases);
  std::vector<std::string> train_ids = split.train;
  if (cfg.data_fraction < 1.0)
    train_ids = subsample_fraction(split.train, diag_table, cfg.data_fraction, cfg.seed);
  std::sort(train_ids.begin(), train_ids.end());

  std::vector<std::string> aux_ids = train_ids;
  if (cfg.use_mci_in_aux) {
    for (const auto& c : cases)
      if (c.diagnosis == Diagnosis::MCI) aux_ids.push_back(c.id);
    std::sort(aux_ids.begin(), aux_ids.end());
  }

  ModelConfig mcfg;
  mcfg.encoder = cfg.encoder;
  mcfg.grid = cases.front().volume.shape;
  mcfg.k_codes = atlas.k_codes();
  mcfg.input_mode = cfg.input_mode;
  mcfg.mc_heads = true;
  mcfg.dual_stream = false;

  std::vector<std::string> all_ids = train_ids;
  all_ids.insert(all_ids.end(), aux_ids.begin(), aux_ids.end());
  all_ids.insert(all_ids.end(), split.val.begin(), split.val.end());
  all_ids.insert(all_ids.end(), split.test.begin(), split.test.end());
  std::sort(all_ids.begin(), all_ids.end());
  all_ids.erase(std::unique(all_ids.begin(), all_ids.end()), all_ids.end());
  const InputCache cache = build_inputs(table, all_ids, atlas, mcfg);

  const EvalSet val = make_eval_set(table, cache, split.val, &labels);
  const EvalSet test = make_eval_set(table, cache, split.test, &labels);

  const bool needs_aux = cfg.strategy == Strategy::EaP || cfg.strategy == Strategy::EaT ||
                         cfg.strategy == Strategy::EaI;
  const auto det_examples =
      make_train_examples(table, cache, train_ids, &labels,
                          /*need_labels=*/cfg.strategy == Strategy::EaT);
  const auto aux_examples =
      needs_aux ? make_train_examples(table, cache, aux_ids, &labels, true)
                : std::vector<BatchExample>{};

  TrainResult result;
  result.train_case_count = long(train_ids.size());

  PhaseSpec detect_spec;
  detect_spec.name = "detect";
  detect_spec.objective = Objective::Detection;
  detect_spec.epochs = cfg.epochs;
  detect_spec.batch_size = cfg.batch_size;
  detect_spec.learning_rate = cfg.learning_rate;
  detect_spec.order_stream = stream_seed(cfg.seed, "order.detect");
  detect_spec.select_best_val = true;

  PhaseSpec aux_spec = detect_spec;
  aux_spec.name = "aux";
  aux_spec.objective = Objective::Aux;
  aux_spec.epochs = cfg.epochs_pretrain;
  aux_spec.order_stream = stream_seed(cfg.seed, "order.mc");
  aux_spec.select_best_val = false;

  switch (cfg.strategy) {
    case Strategy::BaselineRandom: {
      Network net(mcfg);
      auto params = net.init_params(stream_seed(cfg.seed, "init"));
      result.phases.push_back(run_phase(net, params, det_examples, val, mcfg.k_codes,
                                        detect_spec));
      result.model_config = mcfg;
      result.params = std::move(params);
      result.test_metrics = test_report(net, result.params, test, cfg);
      break;
    }
    case Strategy::BaselinePretrained: {
      Network net(mcfg);
      auto params = net.init_params(stream_seed(cfg.seed, "init"));
      Checkpoint ckpt = read_checkpoint(cfg.init_checkpoint);
      Network src(ckpt.config);
      auto copied = copy_matching_segments(src, ckpt.params, net, params, "enc.", "enc.");
      if (copied.empty())
        throw ConfigError("checkpoint '" + cfg.init_checkpoint +
                          "' has no encoder segments compatible with this model");
      result.phases.push_back(run_phase(net, params, det_examples, val, mcfg.k_codes,
                                        detect_spec));
      result.model_config = mcfg;
      result.params = std::move(params);
      result.test_metrics = test_report(net, result.params, test, cfg);
      break;
    }
    case Strategy::EaP: {
      Network net(mcfg);
      auto params = net.init_params(stream_seed(cfg.seed, "init"));
      result.phases.push_back(run_phase(net, params, aux_examples, val, mcfg.k_codes,
                                        aux_spec));
      // continual update: adaptation starts from the aux-trained parameters;
      // severity heads receive no gradient from the detection objective.
      result.phases.push_back(run_phase(net, params, det_examples, val, mcfg.k_codes,
                                        detect_spec));
      result.model_config = mcfg;
      result.params = std::move(params);
      result.test_metrics = test_report(net, result.params, test, cfg);
      break;
    }
    case Strategy::EaT: {
      Network net(mcfg);
      auto params = net.init_params(stream_seed(cfg.seed, "init"));
      PhaseSpec joint_spec = detect_spec;
      joint_spec.name = "joint";
      joint_spec.objective = Objective::Joint;
      joint_spec.lambda = cfg.lambda_mc;
      // the single joint phase absorbs the aux budget, so the two-phase and
      // joint strategies consume comparable compute
      joint_spec.epochs = cfg.epochs + cfg.epochs_pretrain;
      auto joint_examples = make_train_examples(table, cache, train_ids, &labels, true);
      result.phases.push_back(run_phase(net, params, joint_examples, val, mcfg.k_codes,
                                        joint_spec));
      result.model_config = mcfg;
      result.params = std::move(params);
      result.test_metrics = test_report(net, result.params, test, cfg);
      break;
    }
    case Strategy::EaI: {
      Network aux_net(mcfg);
      auto aux_params = aux_net.init_params(stream_seed(cfg.seed, "init"));
      result.phases.push_back(run_phase(aux_net, aux_params, aux_examples, val,
                                        mcfg.k_codes, aux_spec));

      ModelConfig dual_cfg = mcfg;
      dual_cfg.dual_stream = true;
      dual_cfg.mc_heads = false;
      Network net(dual_cfg);
      auto params = net.init_params(stream_seed(cfg.seed, "init.eai2"));
      copy_matching_segments(aux_net, aux_params, net, params, "enc.", "aux.");
      PhaseSpec stage2 = detect_spec;
      stage2.freeze_aux = cfg.freeze_aux || cfg.zero_aux;
      if (cfg.zero_aux) zero_segments_with_prefix(net, params, "aux.");
      result.phases.push_back(run_phase(net, params, det_examples, val, dual_cfg.k_codes,
                                        stage2));
      result.model_config = dual_cfg;
      result.params = std::move(params);
      result.test_metrics = test_report(net, result.params, test, cfg);
      break;
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

TrainResult train_mc_model(const std::vector<Case>& cases, const AtlasConfig& atlas,
                           const LabelMap& labels, const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  CaseTable table;
  table.cases = &cases;
  for (std::size_t i = 0; i < cases.size(); ++i) table.index[cases[i].id] = i;
  const DatasetSplit split = split_dataset(cases, cfg.seed);
  auto diag_table = diagnosis_table(cases);
  std::vector<std::string> train_ids = split.train;
  if (cfg.data_fraction < 1.0)
    train_ids = subsample_fraction(split.train, diag_table, cfg.data_fraction, cfg.seed);
  std::sort(train_ids.begin(), train_ids.end());
  if (cfg.use_mci_in_aux) {
    for (const auto& c : cases)
      if (c.diagnosis == Diagnosis::MCI) train_ids.push_back(c.id);
    std::sort(train_ids.begin(), train_ids.end());
  }

  ModelConfig mcfg;
  mcfg.encoder = cfg.encoder;
  mcfg.grid = cases.front().volume.shape;
  mcfg.k_codes = atlas.k_codes();
  mcfg.input_mode = cfg.input_mode;

  std::vector<std::string> all_ids = train_ids;
  all_ids.insert(all_ids.end(), split.val.begin(), split.val.end());
  std::sort(all_ids.begin(), all_ids.end());
  all_ids.erase(std::unique(all_ids.begin(), all_ids.end()), all_ids.end());
  const InputCache cache = build_inputs(table, all_ids, atlas, mcfg);
  const EvalSet val = make_eval_set(table, cache, split.val, &labels);
  const auto examples = make_train_examples(table, cache, train_ids, &labels, true);

  Network net(mcfg);
  auto params = net.init_params(stream_seed(cfg.seed, "init"));
  PhaseSpec spec;
  spec.name = "aux";
  spec.objective = Objective::Aux;
  spec.epochs = cfg.epochs_pretrain;
  spec.batch_size = cfg.batch_size;
  spec.learning_rate = cfg.learning_rate;
  spec.order_stream = stream_seed(cfg.seed, "order.mc");

  TrainResult result;
  result.train_case_count = long(train_ids.size());
  result.phases.push_back(run_phase(net, params, examples, val, mcfg.k_codes, spec));
  result.model_config = mcfg;
  result.params = std::move(params);
  auto preds = predict_all(net, result.params, val.inputs);
  result.val_mc_accuracy = mc_accuracy(preds, val.mc, mcfg.k_codes);
  result.test_metrics.strategy = "mc";
  result.test_metrics.seed = cfg.seed;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::string metrics_json(const TrainResult& result, const TrainConfig& cfg) {
  json phases = json::array();
  for (const auto& phase : result.phases) {
    json epochs = json::array();
    for (const auto& e : phase.epochs) {
      epochs.push_back({{"epoch", e.epoch},
                        {"train_total", e.train_total},
                        {"train_detection", e.train_detection},
                        {"train_aux", e.train_aux},
                        {"val_accuracy", e.val_accuracy},
                        {"val_auroc", e.val_auroc},
                        {"val_mc_accuracy", e.val_mc_accuracy}});
    }
    phases.push_back({{"name", phase.name},
                      {"objective", to_string(phase.objective)},
                      {"steps", phase.step_losses.size()},
                      {"selected_epoch", phase.selected_epoch},
                      {"epochs", epochs}});
  }
  json doc = {{"strategy", to_string(cfg.strategy)},
              {"seed", cfg.seed},
              {"data_fraction", cfg.data_fraction},
              {"lambda_mc", cfg.lambda_mc},
              {"train_cases", result.train_case_count},
              {"phases", phases},
              {"test", {{"accuracy", result.test_metrics.accuracy},
                        {"auroc", result.test_metrics.auroc},
                        {"n_cases", result.test_metrics.n_cases},
                        {"n_nc", result.test_metrics.n_nc},
                        {"n_ad", result.test_metrics.n_ad}}},
              {"val_mc_accuracy", result.val_mc_accuracy}};
  return doc.dump(2) + "\n";
}

}  // namespace evidx
