// Times the OpenMP kernels against the serial reference on a training-sized
// workload and checks they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "evidx/kernels.hpp"
#include "evidx/rng.hpp"

using namespace evidx;
using kernels::Conv3dDims;

namespace {

double time_ms(int reps, const auto& fn) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void fill(std::vector<double>& v, Rng& rng) {
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
}

long check_equal(const std::vector<double>& a, const std::vector<double>& b) {
  long mismatches = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) ++mismatches;
  return mismatches;
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);
  std::printf("%-24s %12s %12s %9s %10s\n", "kernel", "serial ms", "openmp ms", "speedup",
              "bit-equal");

  Rng rng(42);
  Conv3dDims d;
  d.cin = 8;
  d.cout = 16;
  d.in_d = d.in_h = d.in_w = 32;
  d.kernel = 3;
  d.stride = 2;
  d.pad = 1;

  std::vector<double> in(d.in_size()), w(d.weight_size()), b(std::size_t(d.cout));
  std::vector<double> out_s(d.out_size()), out_p(d.out_size());
  fill(in, rng);
  fill(w, rng);
  fill(b, rng);

  const int reps = 5;
  double ms_s = time_ms(reps, [&] { kernels::serial::conv3d_forward(in.data(), w.data(), b.data(), out_s.data(), d); });
  double ms_p = time_ms(reps, [&] { kernels::par::conv3d_forward(in.data(), w.data(), b.data(), out_p.data(), d); });
  std::printf("%-24s %12.3f %12.3f %8.2fx %10s\n", "conv3d_forward", ms_s, ms_p, ms_s / ms_p,
              check_equal(out_s, out_p) == 0 ? "yes" : "NO");

  std::vector<double> gout(d.out_size());
  fill(gout, rng);
  std::vector<double> gin_s(d.in_size(), 0.0), gin_p(d.in_size(), 0.0);
  ms_s = time_ms(reps, [&] {
    std::memset(gin_s.data(), 0, gin_s.size() * sizeof(double));
    kernels::serial::conv3d_backward_input(gout.data(), w.data(), gin_s.data(), d);
  });
  ms_p = time_ms(reps, [&] {
    std::memset(gin_p.data(), 0, gin_p.size() * sizeof(double));
    kernels::par::conv3d_backward_input(gout.data(), w.data(), gin_p.data(), d);
  });
  std::printf("%-24s %12.3f %12.3f %8.2fx %10s\n", "conv3d_backward_input", ms_s, ms_p,
              ms_s / ms_p, check_equal(gin_s, gin_p) == 0 ? "yes" : "NO");

  std::vector<double> gw_s(d.weight_size(), 0.0), gw_p(d.weight_size(), 0.0);
  std::vector<double> gb_s(std::size_t(d.cout), 0.0), gb_p(std::size_t(d.cout), 0.0);
  ms_s = time_ms(reps, [&] {
    std::memset(gw_s.data(), 0, gw_s.size() * sizeof(double));
    std::memset(gb_s.data(), 0, gb_s.size() * sizeof(double));
    kernels::serial::conv3d_backward_params(gout.data(), in.data(), gw_s.data(), gb_s.data(), d);
  });
  ms_p = time_ms(reps, [&] {
    std::memset(gw_p.data(), 0, gw_p.size() * sizeof(double));
    std::memset(gb_p.data(), 0, gb_p.size() * sizeof(double));
    kernels::par::conv3d_backward_params(gout.data(), in.data(), gw_p.data(), gb_p.data(), d);
  });
  std::printf("%-24s %12.3f %12.3f %8.2fx %10s\n", "conv3d_backward_params", ms_s, ms_p,
              ms_s / ms_p,
              check_equal(gw_s, gw_p) + check_equal(gb_s, gb_p) == 0 ? "yes" : "NO");

  const int n_in = 4096, n_out = 512;
  std::vector<double> x(n_in), fw(std::size_t(n_out) * n_in), fb(n_out), y_s(n_out), y_p(n_out);
  fill(x, rng);
  fill(fw, rng);
  fill(fb, rng);
  ms_s = time_ms(20, [&] { kernels::serial::fc_forward(x.data(), fw.data(), fb.data(), y_s.data(), n_in, n_out); });
  ms_p = time_ms(20, [&] { kernels::par::fc_forward(x.data(), fw.data(), fb.data(), y_p.data(), n_in, n_out); });
  std::printf("%-24s %12.3f %12.3f %8.2fx %10s\n", "fc_forward", ms_s, ms_p, ms_s / ms_p,
              check_equal(y_s, y_p) == 0 ? "yes" : "NO");
  return 0;
}
