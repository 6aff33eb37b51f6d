#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evidx/metrics.hpp"
#include "evidx/model.hpp"
#include "evidx/types.hpp"

namespace evidx {

enum class Strategy { BaselineRandom, BaselinePretrained, EaP, EaT, EaI };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct TrainConfig {
  Strategy strategy = Strategy::BaselineRandom;
  double lambda_mc = 1.0;   // aux-loss preference weight
  int epochs = 10;          // detection / adaptation phase
  int epochs_pretrain = 10; // aux phase of the two-stage strategies
  std::uint64_t seed = 0;
  double data_fraction = 1.0;
  int batch_size = 16;
  double learning_rate = 1e-5;
  EncoderConfig encoder;
  InputMode input_mode = InputMode::Masked;
  bool freeze_aux = false;     // keep the aux encoder fixed in stage two
  bool zero_aux = false;       // ablation: aux features forced to zero
  bool use_mci_in_aux = false; // admit MCI cases to aux-phase batches
  std::string init_checkpoint; // pretrained-weights hook

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct EpochRecord {
  int epoch = 0;
  double train_total = 0.0;
  double train_detection = 0.0;
  double train_aux = 0.0;
  double val_accuracy = -1.0;      // -1 when not evaluated in this phase
  double val_auroc = -1.0;
  double val_mc_accuracy = -1.0;
};

struct PhaseRecord {
  std::string name;
  Objective objective = Objective::Detection;
  std::vector<double> step_losses;
  std::vector<EpochRecord> epochs;
  int selected_epoch = -1;  // best-validation epoch, or -1 when unselected
};

struct TrainResult {
  ModelConfig model_config;
  std::vector<double> params;  // selected parameters
  std::vector<PhaseRecord> phases;
  MetricsReport test_metrics;
  double val_mc_accuracy = -1.0;  // aux-task validation score when measured
  long train_case_count = 0;
  double wall_seconds = 0.0;
};

// Trains one strategy end to end on the given cases: deterministic split,
// optional stratified-nested subsampling, strategy-specific phases, model
// selection by validation AUROC, and test-split metrics.
TrainResult train_strategy(const std::vector<Case>& cases, const AtlasConfig& atlas,
                           const LabelMap& labels, const TrainConfig& cfg);

// Aux-task-only model; reports mean per-region 3-class validation accuracy.
TrainResult train_mc_model(const std::vector<Case>& cases, const AtlasConfig& atlas,
                           const LabelMap& labels, const TrainConfig& cfg);

// Deterministic content for metrics.json (no wall clock, no paths).
std::string metrics_json(const TrainResult& result, const TrainConfig& cfg);

}  // namespace evidx
