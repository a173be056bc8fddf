#pragma once

#include <cstddef>
#include <utility>

#include "bfuse/tensor.hpp"

namespace bfuse {

// floor((in + 2*pad - k) / stride) + 1 per axis.
std::pair<std::size_t, std::size_t> conv2d_output_dims(std::size_t in_h, std::size_t in_w,
                                                       std::size_t kernel, std::size_t stride,
                                                       std::size_t padding);

// 2D convolution in the cross-correlation convention (no kernel flip) on a
// single HxWxC sample. Kernels have shape (k, k, in_c, filters), bias
// (filters). Zero padding, square kernel.
Tensor conv2d_forward(const Tensor& input_hwc, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding);

// Batched variants used by the graph executor; x is (N,H,W,C).
Tensor conv2d_forward_batch(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                            std::size_t stride, std::size_t padding);
struct Conv2dGrads {
    Tensor input;
    Tensor kernels;
    Tensor bias;
};
Conv2dGrads conv2d_backward_batch(const Tensor& x, const Tensor& kernels, const Tensor& d_out,
                                  std::size_t stride, std::size_t padding);

// y = x * W^T + b on a batch; x is (N, in), W is (out, in), b is (out).
Tensor dense_forward_batch(const Tensor& x, const Tensor& w, const Tensor& b);
struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};
DenseGrads dense_backward_batch(const Tensor& x, const Tensor& w, const Tensor& d_out);

double sigmoid(double z);

}  // namespace bfuse
