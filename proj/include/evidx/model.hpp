#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evidx/kernels.hpp"
#include "evidx/types.hpp"

namespace evidx {

struct ConvStageSpec {
  int channels = 8;
  int kernel = 3;
  int stride = 2;
};

struct EncoderConfig {
  std::vector<ConvStageSpec> stages{{8, 3, 2}, {16, 3, 2}, {32, 3, 2}};
  std::string variant = "small3";

  int feature_dim() const { return stages.empty() ? 0 : stages.back().channels; }
};

enum class InputMode { Masked, Raw, PerRegionChannels };

std::string to_string(InputMode m);
InputMode input_mode_from_string(const std::string& s);

struct ModelConfig {
  EncoderConfig encoder;
  GridShape grid{32, 32, 32};
  std::vector<int> k_codes;       // ordered disease-relevant region codes
  InputMode input_mode = InputMode::Masked;
  bool dual_stream = false;       // detection input = [h_main | h_aux]
  bool mc_heads = true;           // severity heads present (single-stream)

  int k() const { return int(k_codes.size()); }
  int in_channels() const {
    return input_mode == InputMode::PerRegionChannels ? k() : 1;
  }
  int feature_dim() const { return encoder.feature_dim(); }
  int det_input_dim() const { return dual_stream ? 2 * feature_dim() : feature_dim(); }
  int det_hidden_dim() const { return std::max(det_input_dim() / 2, 4); }

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t count = 0;
  int fan_in = 0;     // 0 for biases
};

// Classifier outputs for one case. Distributions each sum to one.
struct Prediction {
  std::array<double, 2> p_ad{0.5, 0.5};          // [NC, AD]
  std::vector<std::array<double, 3>> mc;         // K x [No, Mild, Severe]
  std::vector<double> features;

  double p_of(Diagnosis d) const { return d == Diagnosis::AD ? p_ad[1] : p_ad[0]; }
};

enum class Objective { Detection, Aux, Joint };

std::string to_string(Objective o);

struct LossBreakdown {
  double total = 0.0;
  double detection = 0.0;  // batch mean
  double aux = 0.0;        // batch sum over cases and regions
};

struct BatchExample {
  const std::vector<double>* input = nullptr;
  Diagnosis diagnosis = Diagnosis::NC;
  const MCLabelSet* mc = nullptr;
};

// Probability floor inside the log; gradients through floored entries are
// zero so analytic and numeric derivatives stay consistent.
constexpr double kProbFloor = 1e-7;

class Network {
 public:
  explicit Network(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  std::size_t param_count() const { return n_params_; }
  const std::vector<ParamSegment>& segments() const { return segments_; }
  const ParamSegment* find_segment(const std::string& name) const;

  // He-normal weights, zero biases; consumed in segment order.
  std::vector<double> init_params(std::uint64_t seed) const;

  Prediction predict(std::span<const double> input, std::span<const double> params) const;

  // Smallest |pre-activation| over every rectified unit for this input.
  // Numeric diagnostics: finite-difference probes are only meaningful when
  // the probe interval stays on one side of each rectifier kink.
  double min_rectifier_margin(std::span<const double> input,
                              std::span<const double> params) const;

  struct BatchWorkspace;  // reusable per-case activations and gradients

  LossBreakdown batch_loss(std::span<const double> params,
                           std::span<const BatchExample> batch, Objective objective,
                           double lambda) const;

  // Accumulates nothing across calls: grad is zeroed, then filled with the
  // batch gradient (detection mean + lambda * aux sum). Per-case
  // contributions are reduced in batch order regardless of thread count.
  LossBreakdown batch_loss_and_grad(std::span<const double> params,
                                    std::span<const BatchExample> batch,
                                    Objective objective, double lambda,
                                    std::vector<double>& grad, BatchWorkspace& ws,
                                    bool freeze_aux = false) const;

  BatchWorkspace make_workspace(std::size_t max_batch) const;

 private:
  struct CaseBuffers;
  void forward_case(const double* input, const double* params, CaseBuffers& cb) const;
  double case_loss_and_backprop(const BatchExample& ex, const double* params,
                                Objective objective, double lambda, double inv_batch,
                                CaseBuffers& cb, double* grad, bool freeze_aux,
                                double* det_component, double* aux_component) const;

  ModelConfig cfg_;
  std::vector<kernels::Conv3dDims> stage_dims_;
  std::vector<ParamSegment> segments_;
  std::size_t n_params_ = 0;
  int feature_dim_ = 0;
};

struct Network::CaseBuffers {
  // forward activations per stage: pre-activation and rectified output
  std::vector<std::vector<double>> pre, act;
  std::vector<double> h;          // pooled features (main, then aux if dual)
  std::vector<double> det_z1, det_a1;
  std::array<double, 2> det_logits{};
  std::vector<std::array<double, 3>> mc_logits;
  // aux-stream activations (dual only)
  std::vector<std::vector<double>> aux_pre, aux_act;
  // backward scratch
  std::vector<std::vector<double>> d_pre, d_act;
  std::vector<std::vector<double>> d_aux_pre, d_aux_act;
  std::vector<double> d_h, d_det_z1, d_det_a1;
};

struct Network::BatchWorkspace {
  std::vector<CaseBuffers> slots;
  std::vector<std::vector<double>> case_grads;
  std::vector<double> case_det_loss, case_aux_loss;
};

// Cross-entropy of the detection distribution against the true class.
double loss_ad(const Prediction& pred, Diagnosis truth);

// Aggregated 3-class cross-entropy over the relevant regions (sum over k).
double loss_mc(const Prediction& pred, const MCLabelSet& labels,
               const std::vector<int>& k_codes);

// Model input assembly per the configured representation.
std::vector<double> build_model_input(const Case& c, const AtlasConfig& atlas,
                                      const ModelConfig& cfg);
std::vector<double> build_model_input(const VolumeGrid& volume,
                                      const ParcellationMap& parcellation,
                                      const SummaryMeasures& measures,
                                      const AtlasConfig& atlas, const ModelConfig& cfg);

// Versioned checkpoint: config JSON + flat parameters (+ optimizer moments).
struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

struct Checkpoint {
  ModelConfig config;
  std::vector<double> params;
  std::optional<AdamState> adam;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies every segment whose name and size match between source and target
// layouts; returns the copied segment names. Used by the pretrained-weights
// hook and by the two-stage strategies.
std::vector<std::string> copy_matching_segments(const Network& src_net,
                                                const std::vector<double>& src,
                                                const Network& dst_net,
                                                std::vector<double>& dst,
                                                const std::string& src_prefix = "",
                                                const std::string& dst_prefix = "");

}  // namespace evidx
