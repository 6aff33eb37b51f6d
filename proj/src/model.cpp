#include "evidx/model.hpp"

#include <cmath>
#include <limits>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "evidx/mask.hpp"
#include "evidx/rng.hpp"

namespace evidx {

namespace K = kernels::par;
using nlohmann::json;

std::string to_string(InputMode m) {
  switch (m) {
    case InputMode::Masked: return "masked";
    case InputMode::Raw: return "raw";
    default: return "per_region";
  }
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "masked") return InputMode::Masked;
  if (s == "raw") return InputMode::Raw;
  if (s == "per_region") return InputMode::PerRegionChannels;
  throw ConfigError("unknown input mode '" + s + "'");
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::Detection: return "detection";
    case Objective::Aux: return "aux";
    default: return "joint";
  }
}

std::string ModelConfig::to_json() const {
  json stages = json::array();
  for (const auto& s : encoder.stages)
    stages.push_back({{"channels", s.channels}, {"kernel", s.kernel}, {"stride", s.stride}});
  json doc = {{"encoder", {{"stages", stages}, {"variant", encoder.variant}}},
              {"grid", {grid.d, grid.h, grid.w}},
              {"k_codes", k_codes},
              {"input_mode", evidx::to_string(input_mode)},
              {"dual_stream", dual_stream},
              {"mc_heads", mc_heads}};
  return doc.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  ModelConfig cfg;
  cfg.encoder.stages.clear();
  for (const auto& s : doc.at("encoder").at("stages"))
    cfg.encoder.stages.push_back(
        {s.at("channels").get<int>(), s.at("kernel").get<int>(), s.at("stride").get<int>()});
  cfg.encoder.variant = doc.at("encoder").value("variant", "small3");
  auto g = doc.at("grid");
  cfg.grid = {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>()};
  cfg.k_codes = doc.at("k_codes").get<std::vector<int>>();
  cfg.input_mode = input_mode_from_string(doc.at("input_mode").get<std::string>());
  cfg.dual_stream = doc.value("dual_stream", false);
  cfg.mc_heads = doc.value("mc_heads", true);
  return cfg;
}

namespace {

void softmax(const double* z, double* p, int n) {
  double zmax = z[0];
  for (int i = 1; i < n; ++i) zmax = std::max(zmax, z[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= sum;
}

double clamped_nll(double p_true) { return -std::log(std::max(p_true, kProbFloor)); }

int diagnosis_index(Diagnosis d) {
  if (d == Diagnosis::MCI) throw LabelError("MCI cases carry no detection label");
  return d == Diagnosis::AD ? 1 : 0;
}

int severity_index(Severity s) { return int(s); }

}  // namespace

Network::Network(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.encoder.stages.empty()) throw ConfigError("encoder needs at least one stage");
  if (cfg_.feature_dim() < 8) throw ConfigError("feature dim must be >= 8");
  if (cfg_.dual_stream && cfg_.mc_heads)
    throw ConfigError("dual-stream model carries no severity heads");

  int c = cfg_.in_channels();
  int d = cfg_.grid.d, h = cfg_.grid.h, w = cfg_.grid.w;
  for (const auto& st : cfg_.encoder.stages) {
    kernels::Conv3dDims dims;
    dims.cin = c;
    dims.cout = st.channels;
    dims.in_d = d;
    dims.in_h = h;
    dims.in_w = w;
    dims.kernel = st.kernel;
    dims.stride = st.stride;
    dims.pad = st.kernel / 2;
    if (dims.out_d() < 1 || dims.out_h() < 1 || dims.out_w() < 1)
      throw ConfigError("encoder stage reduces the grid below 1 voxel");
    stage_dims_.push_back(dims);
    c = st.channels;
    d = dims.out_d();
    h = dims.out_h();
    w = dims.out_w();
  }
  feature_dim_ = cfg_.feature_dim();

  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t count, int fan_in) {
    segments_.push_back({name, offset, count, fan_in});
    offset += count;
  };
  auto add_encoder = [&](const std::string& prefix) {
    for (std::size_t s = 0; s < stage_dims_.size(); ++s) {
      const auto& dims = stage_dims_[s];
      const int fan_in = dims.cin * dims.kernel * dims.kernel * dims.kernel;
      add(prefix + ".conv" + std::to_string(s) + ".w", dims.weight_size(), fan_in);
      add(prefix + ".conv" + std::to_string(s) + ".b", std::size_t(dims.cout), 0);
    }
  };
  add_encoder("enc");
  const int det_in = cfg_.det_input_dim();
  const int det_hidden = cfg_.det_hidden_dim();
  add("det.fc1.w", std::size_t(det_hidden) * det_in, det_in);
  add("det.fc1.b", std::size_t(det_hidden), 0);
  add("det.fc2.w", std::size_t(2) * det_hidden, det_hidden);
  add("det.fc2.b", 2, 0);
  if (cfg_.mc_heads) {
    for (int k = 0; k < cfg_.k(); ++k) {
      add("mc." + std::to_string(k) + ".w", std::size_t(3) * feature_dim_, feature_dim_);
      add("mc." + std::to_string(k) + ".b", 3, 0);
    }
  }
  if (cfg_.dual_stream) add_encoder("aux");
  n_params_ = offset;
}

const ParamSegment* Network::find_segment(const std::string& name) const {
  for (const auto& s : segments_)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<double> Network::init_params(std::uint64_t seed) const {
  std::vector<double> params(n_params_, 0.0);
  Rng rng(seed);
  for (const auto& seg : segments_) {
    if (seg.fan_in == 0) continue;  // biases start at zero
    const double scale = std::sqrt(2.0 / double(seg.fan_in));
    for (std::size_t i = 0; i < seg.count; ++i)
      params[seg.offset + i] = rng.gaussian() * scale;
  }
  return params;
}

Network::BatchWorkspace Network::make_workspace(std::size_t max_batch) const {
  BatchWorkspace ws;
  ws.slots.resize(max_batch);
  ws.case_grads.assign(max_batch, std::vector<double>(n_params_, 0.0));
  ws.case_det_loss.assign(max_batch, 0.0);
  ws.case_aux_loss.assign(max_batch, 0.0);
  return ws;
}

namespace {

void ensure_stream_buffers(std::vector<std::vector<double>>& pre,
                           std::vector<std::vector<double>>& act,
                           const std::vector<kernels::Conv3dDims>& dims) {
  pre.resize(dims.size());
  act.resize(dims.size());
  for (std::size_t s = 0; s < dims.size(); ++s) {
    pre[s].assign(dims[s].out_size(), 0.0);
    act[s].assign(dims[s].out_size(), 0.0);
  }
}

}  // namespace

void Network::forward_case(const double* input, const double* params, CaseBuffers& cb) const {
  ensure_stream_buffers(cb.pre, cb.act, stage_dims_);
  const int dfeat = feature_dim_;
  cb.h.assign(std::size_t(cfg_.det_input_dim()), 0.0);

  auto run_encoder = [&](const char* prefix, const double* x,
                         std::vector<std::vector<double>>& pre,
                         std::vector<std::vector<double>>& act, double* h_out) {
    for (std::size_t s = 0; s < stage_dims_.size(); ++s) {
      const auto& dims = stage_dims_[s];
      const std::string base = std::string(prefix) + ".conv" + std::to_string(s);
      const double* w = params + find_segment(base + ".w")->offset;
      const double* b = params + find_segment(base + ".b")->offset;
      K::conv3d_forward(x, w, b, pre[s].data(), dims);
      K::relu_forward(pre[s].data(), act[s].data(), pre[s].size());
      x = act[s].data();
    }
    const auto& last = stage_dims_.back();
    K::global_avg_pool_forward(act.back().data(), h_out, last.cout, last.out_spatial());
  };

  run_encoder("enc", input, cb.pre, cb.act, cb.h.data());
  if (cfg_.dual_stream) {
    ensure_stream_buffers(cb.aux_pre, cb.aux_act, stage_dims_);
    run_encoder("aux", input, cb.aux_pre, cb.aux_act, cb.h.data() + dfeat);
  }

  const int det_in = cfg_.det_input_dim();
  const int det_hidden = cfg_.det_hidden_dim();
  cb.det_z1.assign(std::size_t(det_hidden), 0.0);
  cb.det_a1.assign(std::size_t(det_hidden), 0.0);
  K::fc_forward(cb.h.data(), params + find_segment("det.fc1.w")->offset,
                params + find_segment("det.fc1.b")->offset, cb.det_z1.data(), det_in,
                det_hidden);
  K::relu_forward(cb.det_z1.data(), cb.det_a1.data(), cb.det_z1.size());
  K::fc_forward(cb.det_a1.data(), params + find_segment("det.fc2.w")->offset,
                params + find_segment("det.fc2.b")->offset, cb.det_logits.data(), det_hidden,
                2);

  if (cfg_.mc_heads) {
    cb.mc_logits.assign(std::size_t(cfg_.k()), {0.0, 0.0, 0.0});
    for (int k = 0; k < cfg_.k(); ++k) {
      const std::string base = "mc." + std::to_string(k);
      K::fc_forward(cb.h.data(), params + find_segment(base + ".w")->offset,
                    params + find_segment(base + ".b")->offset, cb.mc_logits[std::size_t(k)].data(),
                    feature_dim_, 3);
    }
  }
}

Prediction Network::predict(std::span<const double> input,
                            std::span<const double> params) const {
  if (input.size() != std::size_t(cfg_.in_channels()) * cfg_.grid.voxels())
    throw ShapeError("model input has wrong size");
  if (params.size() != n_params_) throw ShapeError("parameter vector has wrong size");
  CaseBuffers cb;
  forward_case(input.data(), params.data(), cb);
  Prediction pred;
  softmax(cb.det_logits.data(), pred.p_ad.data(), 2);
  if (cfg_.mc_heads) {
    pred.mc.resize(std::size_t(cfg_.k()));
    for (int k = 0; k < cfg_.k(); ++k)
      softmax(cb.mc_logits[std::size_t(k)].data(), pred.mc[std::size_t(k)].data(), 3);
  }
  pred.features = cb.h;
  return pred;
}

double Network::min_rectifier_margin(std::span<const double> input,
                                     std::span<const double> params) const {
  CaseBuffers cb;
  forward_case(input.data(), params.data(), cb);
  double margin = std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<std::vector<double>>& tensors) {
    for (const auto& t : tensors)
      for (double v : t) margin = std::min(margin, std::abs(v));
  };
  scan(cb.pre);
  if (cfg_.dual_stream) scan(cb.aux_pre);
  for (double v : cb.det_z1) margin = std::min(margin, std::abs(v));
  return margin;
}

double Network::case_loss_and_backprop(const BatchExample& ex, const double* params,
                                       Objective objective, double lambda,
                                       double inv_batch, CaseBuffers& cb, double* grad,
                                       bool freeze_aux, double* det_component,
                                       double* aux_component) const {
  forward_case(ex.input->data(), params, cb);

  const bool want_det = objective != Objective::Aux;
  const bool want_aux = objective != Objective::Detection;
  if (want_aux && !cfg_.mc_heads)
    throw ConfigError("objective needs severity heads the model lacks");

  std::array<double, 2> p_det{};
  softmax(cb.det_logits.data(), p_det.data(), 2);
  double det_loss = 0.0;
  std::array<double, 2> dz_det{0.0, 0.0};
  if (want_det) {
    const int t = diagnosis_index(ex.diagnosis);
    det_loss = clamped_nll(p_det[std::size_t(t)]);
    if (grad && p_det[std::size_t(t)] > kProbFloor) {
      for (int j = 0; j < 2; ++j)
        dz_det[std::size_t(j)] = inv_batch * (p_det[std::size_t(j)] - (j == t ? 1.0 : 0.0));
    }
  }

  double aux_loss = 0.0;
  std::vector<std::array<double, 3>> dz_mc;
  const double w_mc = objective == Objective::Aux ? 1.0 : lambda;
  if (want_aux) {
    if (!ex.mc) throw LabelError("training case is missing its severity label set");
    dz_mc.assign(std::size_t(cfg_.k()), {0.0, 0.0, 0.0});
    for (int k = 0; k < cfg_.k(); ++k) {
      const int code = cfg_.k_codes[std::size_t(k)];
      auto it = ex.mc->labels.find(code);
      if (it == ex.mc->labels.end())
        throw LabelError("no severity label for region " + std::to_string(code));
      std::array<double, 3> p{};
      softmax(cb.mc_logits[std::size_t(k)].data(), p.data(), 3);
      const int t = severity_index(it->second);
      aux_loss += clamped_nll(p[std::size_t(t)]);
      if (grad && w_mc != 0.0 && p[std::size_t(t)] > kProbFloor) {
        for (int j = 0; j < 3; ++j)
          dz_mc[std::size_t(k)][std::size_t(j)] =
              w_mc * (p[std::size_t(j)] - (j == t ? 1.0 : 0.0));
      }
    }
  }
  *det_component = want_det ? det_loss : 0.0;
  *aux_component = want_aux ? aux_loss : 0.0;
  if (!grad) return 0.0;

  // ---- backward ----
  const int det_in = cfg_.det_input_dim();
  const int det_hidden = cfg_.det_hidden_dim();
  cb.d_h.assign(std::size_t(det_in), 0.0);
  cb.d_det_z1.assign(std::size_t(det_hidden), 0.0);
  cb.d_det_a1.assign(std::size_t(det_hidden), 0.0);

  auto gseg = [&](const std::string& name) { return grad + find_segment(name)->offset; };
  auto pseg = [&](const std::string& name) { return params + find_segment(name)->offset; };

  if (want_det) {
    K::fc_backward(cb.det_a1.data(), pseg("det.fc2.w"), dz_det.data(), cb.d_det_a1.data(),
                   gseg("det.fc2.w"), gseg("det.fc2.b"), det_hidden, 2);
    K::relu_backward(cb.det_z1.data(), cb.d_det_a1.data(), cb.d_det_z1.data(),
                     cb.det_z1.size());
    K::fc_backward(cb.h.data(), pseg("det.fc1.w"), cb.d_det_z1.data(), cb.d_h.data(),
                   gseg("det.fc1.w"), gseg("det.fc1.b"), det_in, det_hidden);
  }
  if (want_aux && w_mc != 0.0) {
    for (int k = 0; k < cfg_.k(); ++k) {
      const std::string base = "mc." + std::to_string(k);
      K::fc_backward(cb.h.data(), pseg(base + ".w"), dz_mc[std::size_t(k)].data(),
                     cb.d_h.data(), gseg(base + ".w"), gseg(base + ".b"), feature_dim_, 3);
    }
  }

  auto backward_encoder = [&](const char* prefix, const double* input,
                              const std::vector<std::vector<double>>& pre,
                              const std::vector<std::vector<double>>& act,
                              std::vector<std::vector<double>>& d_pre,
                              std::vector<std::vector<double>>& d_act, const double* dh) {
    d_pre.resize(stage_dims_.size());
    d_act.resize(stage_dims_.size());
    for (std::size_t s = 0; s < stage_dims_.size(); ++s) {
      d_pre[s].assign(stage_dims_[s].out_size(), 0.0);
      d_act[s].assign(stage_dims_[s].out_size(), 0.0);
    }
    const auto& last = stage_dims_.back();
    K::global_avg_pool_backward(dh, d_act.back().data(), last.cout, last.out_spatial());
    for (int s = int(stage_dims_.size()) - 1; s >= 0; --s) {
      const auto& dims = stage_dims_[std::size_t(s)];
      const std::string base = std::string(prefix) + ".conv" + std::to_string(s);
      K::relu_backward(pre[std::size_t(s)].data(), d_act[std::size_t(s)].data(),
                       d_pre[std::size_t(s)].data(), pre[std::size_t(s)].size());
      const double* stage_in = s == 0 ? input : act[std::size_t(s - 1)].data();
      K::conv3d_backward_params(d_pre[std::size_t(s)].data(), stage_in, gseg(base + ".w"),
                                gseg(base + ".b"), dims);
      if (s > 0)
        K::conv3d_backward_input(d_pre[std::size_t(s)].data(), pseg(base + ".w"),
                                 d_act[std::size_t(s - 1)].data(), dims);
    }
  };

  backward_encoder("enc", ex.input->data(), cb.pre, cb.act, cb.d_pre, cb.d_act,
                   cb.d_h.data());
  if (cfg_.dual_stream && !freeze_aux)
    backward_encoder("aux", ex.input->data(), cb.aux_pre, cb.aux_act, cb.d_aux_pre,
                     cb.d_aux_act, cb.d_h.data() + feature_dim_);
  return 0.0;
}

LossBreakdown Network::batch_loss(std::span<const double> params,
                                  std::span<const BatchExample> batch, Objective objective,
                                  double lambda) const {
  if (batch.empty()) throw Error("empty batch");
  if (params.size() != n_params_) throw ShapeError("parameter vector has wrong size");
  CaseBuffers cb;
  double det_sum = 0.0, aux_sum = 0.0;
  for (const auto& ex : batch) {
    double det = 0.0, aux = 0.0;
    case_loss_and_backprop(ex, params.data(), objective, lambda, 0.0, cb, nullptr, false,
                           &det, &aux);
    det_sum += det;
    aux_sum += aux;
  }
  LossBreakdown out;
  out.detection = objective == Objective::Aux ? 0.0 : det_sum / double(batch.size());
  out.aux = objective == Objective::Detection ? 0.0 : aux_sum;
  switch (objective) {
    case Objective::Detection: out.total = out.detection; break;
    case Objective::Aux: out.total = out.aux; break;
    case Objective::Joint: out.total = out.detection + lambda * out.aux; break;
  }
  return out;
}

LossBreakdown Network::batch_loss_and_grad(std::span<const double> params,
                                           std::span<const BatchExample> batch,
                                           Objective objective, double lambda,
                                           std::vector<double>& grad, BatchWorkspace& ws,
                                           bool freeze_aux) const {
  if (batch.empty()) throw Error("empty batch");
  if (params.size() != n_params_) throw ShapeError("parameter vector has wrong size");
  if (ws.slots.size() < batch.size()) throw Error("workspace smaller than batch");
  grad.assign(n_params_, 0.0);
  const double inv_batch = 1.0 / double(batch.size());

  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)batch.size(); ++i) {
    try {
      auto bi = std::size_t(i);
      std::fill(ws.case_grads[bi].begin(), ws.case_grads[bi].end(), 0.0);
      case_loss_and_backprop(batch[bi], params.data(), objective, lambda, inv_batch,
                             ws.slots[bi], ws.case_grads[bi].data(), freeze_aux,
                             &ws.case_det_loss[bi], &ws.case_aux_loss[bi]);
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);

  // Ordered reduction keeps results identical for any thread count.
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    const auto& cg = ws.case_grads[bi];
    for (std::size_t j = 0; j < n_params_; ++j) grad[j] += cg[j];
  }
  double det_sum = 0.0, aux_sum = 0.0;
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    det_sum += ws.case_det_loss[bi];
    aux_sum += ws.case_aux_loss[bi];
  }
  LossBreakdown out;
  out.detection = objective == Objective::Aux ? 0.0 : det_sum * inv_batch;
  out.aux = objective == Objective::Detection ? 0.0 : aux_sum;
  switch (objective) {
    case Objective::Detection: out.total = out.detection; break;
    case Objective::Aux: out.total = out.aux; break;
    case Objective::Joint: out.total = out.detection + lambda * out.aux; break;
  }
  return out;
}

double loss_ad(const Prediction& pred, Diagnosis truth) {
  diagnosis_index(truth);  // rejects MCI
  return clamped_nll(pred.p_of(truth));
}

double loss_mc(const Prediction& pred, const MCLabelSet& labels,
               const std::vector<int>& k_codes) {
  if (pred.mc.size() != k_codes.size())
    throw LabelError("prediction has wrong number of severity distributions");
  double sum = 0.0;
  for (std::size_t k = 0; k < k_codes.size(); ++k) {
    auto it = labels.labels.find(k_codes[k]);
    if (it == labels.labels.end())
      throw LabelError("no severity label for region " + std::to_string(k_codes[k]));
    sum += clamped_nll(pred.mc[k][std::size_t(severity_index(it->second))]);
  }
  return sum;
}

std::vector<double> build_model_input(const VolumeGrid& volume,
                                      const ParcellationMap& parcellation,
                                      const SummaryMeasures& measures,
                                      const AtlasConfig& atlas, const ModelConfig& cfg) {
  if (volume.shape != cfg.grid)
    throw ShapeError("case grid does not match the model's configured grid");
  const std::size_t vox = volume.shape.voxels();
  if (cfg.input_mode == InputMode::Raw) {
    std::vector<double> out(vox);
    for (std::size_t i = 0; i < vox; ++i) out[i] = double(volume.data[i]);
    return out;
  }
  if (cfg.input_mode == InputMode::Masked) {
    Case shim;
    shim.volume = volume;
    shim.parcellation = parcellation;
    shim.measures = measures;
    VolumeGrid masked = mask_to_k_regions(shim, atlas);
    std::vector<double> out(vox);
    for (std::size_t i = 0; i < vox; ++i) out[i] = double(masked.data[i]);
    return out;
  }
  // one channel per relevant region
  const auto codes = atlas.k_codes();
  for (int code : codes)
    if (!measures.volume_mm3.count(code)) throw MissingRegionError(code);
  std::vector<double> out(codes.size() * vox, 0.0);
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const int code = codes[k];
    double* ch = out.data() + k * vox;
    for (std::size_t i = 0; i < vox; ++i)
      if (parcellation.labels[i] == code) ch[i] = double(volume.data[i]);
  }
  return out;
}

std::vector<double> build_model_input(const Case& c, const AtlasConfig& atlas,
                                      const ModelConfig& cfg) {
  return build_model_input(c.volume, c.parcellation, c.measures, atlas, cfg);
}

namespace {

constexpr char kCheckpointMagic[4] = {'E', 'V', 'D', 'X'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 4);
  write_pod(out, kCheckpointVersion);
  const std::string cfg = ckpt.config.to_json();
  write_pod(out, std::uint64_t(cfg.size()));
  out.write(cfg.data(), std::streamsize(cfg.size()));
  write_pod(out, std::uint64_t(ckpt.params.size()));
  out.write(reinterpret_cast<const char*>(ckpt.params.data()),
            std::streamsize(ckpt.params.size() * sizeof(double)));
  const std::uint8_t has_adam = ckpt.adam ? 1 : 0;
  write_pod(out, has_adam);
  if (ckpt.adam) {
    write_pod(out, std::uint64_t(ckpt.adam->m.size()));
    out.write(reinterpret_cast<const char*>(ckpt.adam->m.data()),
              std::streamsize(ckpt.adam->m.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ckpt.adam->v.data()),
              std::streamsize(ckpt.adam->v.size() * sizeof(double)));
    write_pod(out, std::int64_t(ckpt.adam->step));
  }
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw IoError(path.string() + " is not a checkpoint file");
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  std::uint64_t cfg_len = 0;
  read_pod(in, cfg_len);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), std::streamsize(cfg_len));
  Checkpoint ckpt;
  ckpt.config = ModelConfig::from_json(cfg_text);
  std::uint64_t n = 0;
  read_pod(in, n);
  ckpt.params.resize(n);
  in.read(reinterpret_cast<char*>(ckpt.params.data()), std::streamsize(n * sizeof(double)));
  std::uint8_t has_adam = 0;
  read_pod(in, has_adam);
  if (has_adam) {
    std::uint64_t m = 0;
    read_pod(in, m);
    AdamState adam;
    adam.m.resize(m);
    adam.v.resize(m);
    in.read(reinterpret_cast<char*>(adam.m.data()), std::streamsize(m * sizeof(double)));
    in.read(reinterpret_cast<char*>(adam.v.data()), std::streamsize(m * sizeof(double)));
    std::int64_t step = 0;
    read_pod(in, step);
    adam.step = long(step);
    ckpt.adam = std::move(adam);
  }
  if (!in) throw IoError("truncated checkpoint " + path.string());
  return ckpt;
}

std::vector<std::string> copy_matching_segments(const Network& src_net,
                                                const std::vector<double>& src,
                                                const Network& dst_net,
                                                std::vector<double>& dst,
                                                const std::string& src_prefix,
                                                const std::string& dst_prefix) {
  std::vector<std::string> copied;
  for (const auto& sseg : src_net.segments()) {
    if (sseg.name.rfind(src_prefix, 0) != 0) continue;
    const std::string dst_name = dst_prefix + sseg.name.substr(src_prefix.size());
    const ParamSegment* dseg = dst_net.find_segment(dst_name);
    if (!dseg || dseg->count != sseg.count) continue;
    std::copy_n(src.begin() + long(sseg.offset), sseg.count, dst.begin() + long(dseg->offset));
    copied.push_back(dst_name);
  }
  return copied;
}

}  // namespace evidx
