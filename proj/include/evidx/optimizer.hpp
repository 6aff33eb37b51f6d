#pragma once

#include <cmath>
#include <vector>

#include "evidx/model.hpp"

namespace evidx {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline AdamState make_adam_state(std::size_t n) {
  return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
}

// One bias-corrected moment update. Elementwise, so thread count never
// changes the result; lr == 0 leaves the parameters bit-identical.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grad,
                      AdamState& state, double lr, const AdamConfig& cfg = {}) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
  const long long n = (long long)params.size();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const double g = grad[std::size_t(i)];
    double& m = state.m[std::size_t(i)];
    double& v = state.v[std::size_t(i)];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    params[std::size_t(i)] -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
  }
}

// Single-cycle schedule: linear warmup from the base rate to ten times the
// base over the first 30% of steps, then cosine decay to zero.
struct OneCycleSchedule {
  double base_lr = 1e-5;
  long total_steps = 0;
  double peak_mult = 10.0;
  double warmup_frac = 0.3;

  double lr_at(long step) const {
    if (total_steps <= 0) return base_lr;
    const double peak = base_lr * peak_mult;
    const long warm = long(std::floor(warmup_frac * double(total_steps)));
    if (step < warm) return base_lr + (peak - base_lr) * (double(step) / double(warm));
    const long decay = total_steps - warm;
    const double progress = decay <= 1 ? 1.0 : double(step - warm) / double(decay - 1);
    return peak * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
  }
};

}  // namespace evidx
