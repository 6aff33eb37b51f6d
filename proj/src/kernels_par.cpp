#include "evidx/kernels.hpp"

// Parallelism is always over independent output elements; each element's
// reduction runs serially in the same order as the serial reference, so the
// two namespaces produce identical bits for identical inputs.

namespace evidx::kernels::par {

void conv3d_forward(const double* in, const double* w, const double* b, double* out,
                    const Conv3dDims& d) {
  const int od = d.out_d(), oh = d.out_h(), ow = d.out_w();
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < d.cout; ++co)
    for (int oz = 0; oz < od; ++oz)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = b[co];
          for (int ci = 0; ci < d.cin; ++ci)
            for (int kz = 0; kz < d.kernel; ++kz) {
              const int z = oz * d.stride + kz - d.pad;
              if (z < 0 || z >= d.in_d) continue;
              for (int ky = 0; ky < d.kernel; ++ky) {
                const int y = oy * d.stride + ky - d.pad;
                if (y < 0 || y >= d.in_h) continue;
                for (int kx = 0; kx < d.kernel; ++kx) {
                  const int x = ox * d.stride + kx - d.pad;
                  if (x < 0 || x >= d.in_w) continue;
                  acc += in[((std::size_t(ci) * d.in_d + z) * d.in_h + y) * d.in_w + x] *
                         w[(((std::size_t(co) * d.cin + ci) * d.kernel + kz) * d.kernel + ky) *
                               d.kernel +
                           kx];
                }
              }
            }
          out[((std::size_t(co) * od + oz) * oh + oy) * ow + ox] = acc;
        }
}

void conv3d_backward_input(const double* gout, const double* w, double* gin,
                           const Conv3dDims& d) {
  const int od = d.out_d(), oh = d.out_h(), ow = d.out_w();
#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < d.cin; ++ci)
    for (int z = 0; z < d.in_d; ++z)
      for (int y = 0; y < d.in_h; ++y)
        for (int x = 0; x < d.in_w; ++x) {
          double acc = 0.0;
          for (int co = 0; co < d.cout; ++co)
            for (int kz = 0; kz < d.kernel; ++kz) {
              const int num_z = z + d.pad - kz;
              if (num_z < 0 || num_z % d.stride != 0) continue;
              const int oz = num_z / d.stride;
              if (oz >= od) continue;
              for (int ky = 0; ky < d.kernel; ++ky) {
                const int num_y = y + d.pad - ky;
                if (num_y < 0 || num_y % d.stride != 0) continue;
                const int oy = num_y / d.stride;
                if (oy >= oh) continue;
                for (int kx = 0; kx < d.kernel; ++kx) {
                  const int num_x = x + d.pad - kx;
                  if (num_x < 0 || num_x % d.stride != 0) continue;
                  const int ox = num_x / d.stride;
                  if (ox >= ow) continue;
                  acc += gout[((std::size_t(co) * od + oz) * oh + oy) * ow + ox] *
                         w[(((std::size_t(co) * d.cin + ci) * d.kernel + kz) * d.kernel + ky) *
                               d.kernel +
                           kx];
                }
              }
            }
          gin[((std::size_t(ci) * d.in_d + z) * d.in_h + y) * d.in_w + x] += acc;
        }
}

void conv3d_backward_params(const double* gout, const double* in, double* gw, double* gb,
                            const Conv3dDims& d) {
  const int od = d.out_d(), oh = d.out_h(), ow = d.out_w();
  const int kk = d.kernel * d.kernel * d.kernel;
  const long n_weights = long(d.cout) * d.cin * kk;
#pragma omp parallel for schedule(static)
  for (long wi = 0; wi < n_weights; ++wi) {
    const int co = int(wi / (d.cin * kk));
    const int ci = int((wi / kk) % d.cin);
    const int kz = int((wi / (d.kernel * d.kernel)) % d.kernel);
    const int ky = int((wi / d.kernel) % d.kernel);
    const int kx = int(wi % d.kernel);
    double acc = 0.0;
    for (int oz = 0; oz < od; ++oz) {
      const int z = oz * d.stride + kz - d.pad;
      if (z < 0 || z >= d.in_d) continue;
      for (int oy = 0; oy < oh; ++oy) {
        const int y = oy * d.stride + ky - d.pad;
        if (y < 0 || y >= d.in_h) continue;
        for (int ox = 0; ox < ow; ++ox) {
          const int x = ox * d.stride + kx - d.pad;
          if (x < 0 || x >= d.in_w) continue;
          acc += gout[((std::size_t(co) * od + oz) * oh + oy) * ow + ox] *
                 in[((std::size_t(ci) * d.in_d + z) * d.in_h + y) * d.in_w + x];
        }
      }
    }
    gw[wi] += acc;
  }
#pragma omp parallel for schedule(static)
  for (int co = 0; co < d.cout; ++co) {
    double acc = 0.0;
    const double* g = gout + std::size_t(co) * d.out_spatial();
    for (std::size_t i = 0; i < d.out_spatial(); ++i) acc += g[i];
    gb[co] += acc;
  }
}

void relu_forward(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x_pre, const double* gy, double* gx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)n; ++i) gx[i] += x_pre[i] > 0.0 ? gy[i] : 0.0;
}

void global_avg_pool_forward(const double* in, double* out, int channels,
                             std::size_t spatial) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    double acc = 0.0;
    const double* p = in + std::size_t(c) * spatial;
    for (std::size_t i = 0; i < spatial; ++i) acc += p[i];
    out[c] = acc / double(spatial);
  }
}

void global_avg_pool_backward(const double* gout, double* gin, int channels,
                              std::size_t spatial) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    const double g = gout[c] / double(spatial);
    double* p = gin + std::size_t(c) * spatial;
    for (std::size_t i = 0; i < spatial; ++i) p[i] += g;
  }
}

void fc_forward(const double* x, const double* w, const double* b, double* y, int n_in,
                int n_out) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    double acc = b[o];
    const double* row = w + std::size_t(o) * n_in;
    for (int i = 0; i < n_in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void fc_backward(const double* x, const double* w, const double* gy, double* gx,
                 double* gw, double* gb, int n_in, int n_out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_in; ++i) {
    double acc = 0.0;
    for (int o = 0; o < n_out; ++o) acc += gy[o] * w[std::size_t(o) * n_in + i];
    gx[i] += acc;
  }
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    const double g = gy[o];
    double* row = gw + std::size_t(o) * n_in;
    for (int i = 0; i < n_in; ++i) row[i] += g * x[i];
    gb[o] += g;
  }
}

}  // namespace evidx::kernels::par
