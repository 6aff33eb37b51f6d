#pragma once

#include <cstddef>

namespace evidx::kernels {

struct Conv3dDims {
  int cin = 1, cout = 1;
  int in_d = 0, in_h = 0, in_w = 0;
  int kernel = 3, stride = 1, pad = 1;

  int out_d() const { return (in_d + 2 * pad - kernel) / stride + 1; }
  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  std::size_t in_spatial() const { return std::size_t(in_d) * in_h * in_w; }
  std::size_t out_spatial() const { return std::size_t(out_d()) * out_h() * out_w(); }
  std::size_t in_size() const { return std::size_t(cin) * in_spatial(); }
  std::size_t out_size() const { return std::size_t(cout) * out_spatial(); }
  std::size_t weight_size() const {
    return std::size_t(cout) * cin * kernel * kernel * kernel;
  }
};

// Gradient kernels accumulate (+=) into their outputs; callers zero the
// buffers once per backward pass. Both implementations perform the inner
// reductions in the same order, so their results agree bit for bit and are
// independent of the thread count.

#define EVIDX_KERNEL_API                                                               \
  void conv3d_forward(const double* in, const double* w, const double* b, double* out, \
                      const Conv3dDims& dims);                                         \
  void conv3d_backward_input(const double* gout, const double* w, double* gin,         \
                             const Conv3dDims& dims);                                  \
  void conv3d_backward_params(const double* gout, const double* in, double* gw,        \
                              double* gb, const Conv3dDims& dims);                     \
  void relu_forward(const double* x, double* y, std::size_t n);                        \
  void relu_backward(const double* x_pre, const double* gy, double* gx, std::size_t n);\
  void global_avg_pool_forward(const double* in, double* out, int channels,            \
                               std::size_t spatial);                                   \
  void global_avg_pool_backward(const double* gout, double* gin, int channels,         \
                                std::size_t spatial);                                  \
  void fc_forward(const double* x, const double* w, const double* b, double* y,        \
                  int n_in, int n_out);                                                \
  void fc_backward(const double* x, const double* w, const double* gy, double* gx,     \
                   double* gw, double* gb, int n_in, int n_out);

// Plain nested-loop reference. Kept permanently as the test oracle and the
// benchmark baseline.
namespace serial {
EVIDX_KERNEL_API
}

// OpenMP-parallel implementations used by the model.
namespace par {
EVIDX_KERNEL_API
}

#undef EVIDX_KERNEL_API

}  // namespace evidx::kernels
