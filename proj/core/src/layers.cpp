#include "bfuse/layers.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

// Gathers conv patches: out is (N*OH*OW, k*k*C) row-major.
void im2col(const Tensor& x, std::size_t kernel, std::size_t stride, std::size_t padding,
            std::size_t out_h, std::size_t out_w, std::vector<double>& patches) {
    const std::size_t n = x.dim(0), in_h = x.dim(1), in_w = x.dim(2), c = x.dim(3);
    const std::size_t patch_len = kernel * kernel * c;
    patches.assign(n * out_h * out_w * patch_len, 0.0);
    const double* src = x.data();
    for (std::size_t s = 0; s < n; ++s) {
        const double* sample = src + s * in_h * in_w * c;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            const long y0 = static_cast<long>(oy * stride) - static_cast<long>(padding);
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const long x0 = static_cast<long>(ox * stride) - static_cast<long>(padding);
                double* dst = patches.data() + ((s * out_h + oy) * out_w + ox) * patch_len;
                for (std::size_t ky = 0; ky < kernel; ++ky) {
                    const long yy = y0 + static_cast<long>(ky);
                    if (yy < 0 || yy >= static_cast<long>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kernel; ++kx) {
                        const long xx = x0 + static_cast<long>(kx);
                        if (xx < 0 || xx >= static_cast<long>(in_w)) continue;
                        const double* row =
                            sample + (static_cast<std::size_t>(yy) * in_w +
                                      static_cast<std::size_t>(xx)) *
                                         c;
                        double* cell = dst + (ky * kernel + kx) * c;
                        for (std::size_t ch = 0; ch < c; ++ch) cell[ch] = row[ch];
                    }
                }
            }
        }
    }
}

// Scatter-adds patch gradients back onto the input layout.
void col2im(const std::vector<double>& patches, std::size_t kernel, std::size_t stride,
            std::size_t padding, std::size_t out_h, std::size_t out_w, Tensor& dx) {
    const std::size_t n = dx.dim(0), in_h = dx.dim(1), in_w = dx.dim(2), c = dx.dim(3);
    const std::size_t patch_len = kernel * kernel * c;
    double* dst_base = dx.data();
    for (std::size_t s = 0; s < n; ++s) {
        double* sample = dst_base + s * in_h * in_w * c;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            const long y0 = static_cast<long>(oy * stride) - static_cast<long>(padding);
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const long x0 = static_cast<long>(ox * stride) - static_cast<long>(padding);
                const double* src = patches.data() + ((s * out_h + oy) * out_w + ox) * patch_len;
                for (std::size_t ky = 0; ky < kernel; ++ky) {
                    const long yy = y0 + static_cast<long>(ky);
                    if (yy < 0 || yy >= static_cast<long>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kernel; ++kx) {
                        const long xx = x0 + static_cast<long>(kx);
                        if (xx < 0 || xx >= static_cast<long>(in_w)) continue;
                        double* row = sample + (static_cast<std::size_t>(yy) * in_w +
                                                static_cast<std::size_t>(xx)) *
                                                   c;
                        const double* cell = src + (ky * kernel + kx) * c;
                        for (std::size_t ch = 0; ch < c; ++ch) row[ch] += cell[ch];
                    }
                }
            }
        }
    }
}

void check_conv_args(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                     std::size_t stride, std::size_t padding) {
    if (x.rank() != 4) throw StructuralError("conv input must be (N,H,W,C)");
    if (kernels.rank() != 4) throw StructuralError("conv kernels must be (k,k,in_c,filters)");
    if (kernels.dim(0) != kernels.dim(1)) throw ValidationError("conv kernel must be square");
    if (stride == 0) throw ValidationError("conv stride must be positive");
    if (kernels.dim(2) != x.dim(3)) {
        throw StructuralError("conv kernel channel count does not match input");
    }
    if (bias.rank() != 1 || bias.dim(0) != kernels.dim(3)) {
        throw StructuralError("conv bias shape must be (filters)");
    }
    const std::size_t k = kernels.dim(0);
    if (k > x.dim(1) + 2 * padding || k > x.dim(2) + 2 * padding) {
        throw ValidationError("conv kernel exceeds padded input size");
    }
}

}  // namespace

std::pair<std::size_t, std::size_t> conv2d_output_dims(std::size_t in_h, std::size_t in_w,
                                                       std::size_t kernel, std::size_t stride,
                                                       std::size_t padding) {
    if (stride == 0) throw ValidationError("conv stride must be positive");
    if (kernel == 0) throw ValidationError("conv kernel must be positive");
    if (kernel > in_h + 2 * padding || kernel > in_w + 2 * padding) {
        throw ValidationError("conv kernel exceeds padded input size");
    }
    return {(in_h + 2 * padding - kernel) / stride + 1,
            (in_w + 2 * padding - kernel) / stride + 1};
}

Tensor conv2d_forward_batch(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                            std::size_t stride, std::size_t padding) {
    check_conv_args(x, kernels, bias, stride, padding);
    const std::size_t n = x.dim(0), k = kernels.dim(0), c = x.dim(3), f = kernels.dim(3);
    const auto [out_h, out_w] = conv2d_output_dims(x.dim(1), x.dim(2), k, stride, padding);

    std::vector<double> patches;
    im2col(x, k, stride, padding, out_h, out_w, patches);

    Tensor y({n, out_h, out_w, f});
    const std::size_t rows = n * out_h * out_w;
    const std::size_t patch_len = k * k * c;
    ConstMapRM p(patches.data(), static_cast<Eigen::Index>(rows),
                 static_cast<Eigen::Index>(patch_len));
    ConstMapRM km(kernels.data(), static_cast<Eigen::Index>(patch_len),
                  static_cast<Eigen::Index>(f));
    MapRM ym(y.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(f));
    ym.noalias() = p * km;
    Eigen::Map<const Eigen::VectorXd> bv(bias.data(), static_cast<Eigen::Index>(f));
    ym.rowwise() += bv.transpose();
    return y;
}

Tensor conv2d_forward(const Tensor& input_hwc, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding) {
    if (input_hwc.rank() != 3) throw StructuralError("conv input must be (H,W,C)");
    Tensor batched({1, input_hwc.dim(0), input_hwc.dim(1), input_hwc.dim(2)},
                   input_hwc.values());
    Tensor out = conv2d_forward_batch(batched, kernels, bias, stride, padding);
    return Tensor({out.dim(1), out.dim(2), out.dim(3)}, out.values());
}

Conv2dGrads conv2d_backward_batch(const Tensor& x, const Tensor& kernels, const Tensor& d_out,
                                  std::size_t stride, std::size_t padding) {
    check_conv_args(x, kernels, Tensor({kernels.dim(3)}), stride, padding);
    const std::size_t n = x.dim(0), k = kernels.dim(0), c = x.dim(3), f = kernels.dim(3);
    const auto [out_h, out_w] = conv2d_output_dims(x.dim(1), x.dim(2), k, stride, padding);
    if (d_out.shape() != std::vector<std::size_t>{n, out_h, out_w, f}) {
        throw StructuralError("conv backward: output gradient shape mismatch");
    }

    const std::size_t rows = n * out_h * out_w;
    const std::size_t patch_len = k * k * c;

    std::vector<double> patches;
    im2col(x, k, stride, padding, out_h, out_w, patches);
    ConstMapRM p(patches.data(), static_cast<Eigen::Index>(rows),
                 static_cast<Eigen::Index>(patch_len));
    ConstMapRM dy(d_out.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(f));
    ConstMapRM km(kernels.data(), static_cast<Eigen::Index>(patch_len),
                  static_cast<Eigen::Index>(f));

    Conv2dGrads g{Tensor(x.shape()), Tensor(kernels.shape()), Tensor({f})};

    MapRM dk(g.kernels.data(), static_cast<Eigen::Index>(patch_len),
             static_cast<Eigen::Index>(f));
    dk.noalias() = p.transpose() * dy;

    Eigen::Map<Eigen::VectorXd> db(g.bias.data(), static_cast<Eigen::Index>(f));
    db = dy.colwise().sum();

    std::vector<double> dpatches(rows * patch_len);
    MapRM dp(dpatches.data(), static_cast<Eigen::Index>(rows),
             static_cast<Eigen::Index>(patch_len));
    dp.noalias() = dy * km.transpose();
    col2im(dpatches, k, stride, padding, out_h, out_w, g.input);
    return g;
}

Tensor dense_forward_batch(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.rank() != 2) throw StructuralError("dense input must be (N, features)");
    if (w.rank() != 2 || w.dim(1) != x.dim(1)) {
        throw StructuralError("dense weight shape mismatch: weights " +
                              shape_to_string(w.shape()) + " vs input " +
                              shape_to_string(x.shape()));
    }
    const std::size_t n = x.dim(0), out = w.dim(0);
    Tensor y({n, out});
    ConstMapRM xm(x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(x.dim(1)));
    ConstMapRM wm(w.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(w.dim(1)));
    MapRM ym(y.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
    ym.noalias() = xm * wm.transpose();
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(out));
    ym.rowwise() += bv.transpose();
    return y;
}

DenseGrads dense_backward_batch(const Tensor& x, const Tensor& w, const Tensor& d_out) {
    const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
    if (d_out.rank() != 2 || d_out.dim(0) != n || d_out.dim(1) != out) {
        throw StructuralError("dense backward: output gradient shape mismatch");
    }
    DenseGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({out})};
    ConstMapRM xm(x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
    ConstMapRM wm(w.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    ConstMapRM dy(d_out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
    MapRM dxm(g.input.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
    MapRM dwm(g.weights.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    dxm.noalias() = dy * wm;
    dwm.noalias() = dy.transpose() * xm;
    Eigen::Map<Eigen::VectorXd> db(g.bias.data(), static_cast<Eigen::Index>(out));
    db = dy.colwise().sum();
    return g;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace bfuse
