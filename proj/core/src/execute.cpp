#include <algorithm>
#include <cmath>

#include "bfuse/errors.hpp"
#include "bfuse/graph.hpp"
#include "bfuse/layers.hpp"

namespace bfuse {

namespace {

bool has_dropout(const ModelGraph& g) {
    for (const auto& n : g.nodes()) {
        if (n.kind == LayerKind::Dropout && n.rate > 0.0) return true;
    }
    return false;
}

}  // namespace

ForwardPass forward(const ModelGraph& g, const std::map<std::string, Tensor>& inputs,
                    bool training, Rng* rng) {
    if (g.output() < 0) throw StructuralError("graph has no output node");
    if (training && has_dropout(g) && rng == nullptr) {
        throw ValidationError("training-mode forward with dropout requires an rng");
    }

    ForwardPass fp;
    fp.training = training;
    fp.activations.resize(static_cast<std::size_t>(g.node_count()));
    fp.dropout_masks.resize(static_cast<std::size_t>(g.node_count()));

    // Bind and validate inputs.
    std::size_t batch = 0;
    for (int id : g.input_ids()) {
        const Node& n = g.node(id);
        auto it = inputs.find(n.name);
        if (it == inputs.end()) throw StructuralError("missing input tensor: " + n.name);
        const Tensor& t = it->second;
        if (t.rank() != n.output_shape.size() + 1 ||
            !std::equal(n.output_shape.begin(), n.output_shape.end(), t.shape().begin() + 1)) {
            throw StructuralError("input " + n.name + " expects per-sample shape " +
                                  shape_to_string(n.output_shape) + ", got tensor " +
                                  shape_to_string(t.shape()));
        }
        if (batch == 0) {
            batch = t.dim(0);
        } else if (t.dim(0) != batch) {
            throw StructuralError("input " + n.name + " batch size differs from other inputs");
        }
        if (!t.all_finite()) throw NumericError("input " + n.name + " contains non-finite values");
        fp.activations[static_cast<std::size_t>(id)] = t;
    }
    if (batch == 0) throw StructuralError("graph has no inputs bound");
    fp.batch = batch;

    for (int id = 0; id < g.node_count(); ++id) {
        const Node& n = g.node(id);
        if (n.kind == LayerKind::Input) {
            if (fp.activations[static_cast<std::size_t>(id)].empty()) {
                throw StructuralError("missing input tensor: " + n.name);
            }
            continue;
        }
        const Tensor& x = fp.activations[static_cast<std::size_t>(n.inputs[0])];
        Tensor& out = fp.activations[static_cast<std::size_t>(id)];
        switch (n.kind) {
            case LayerKind::Dense:
                out = dense_forward_batch(x, g.param(n.weight_name), g.param(n.bias_name));
                break;
            case LayerKind::Conv2D:
                out = conv2d_forward_batch(x, g.param(n.weight_name), g.param(n.bias_name),
                                           n.stride, n.padding);
                break;
            case LayerKind::Relu: {
                out = x;
                for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
                break;
            }
            case LayerKind::Dropout: {
                if (!training || n.rate == 0.0) {
                    out = x;
                    break;
                }
                // Inverted scaling: kept activations divided by keep
                // probability so inference needs no rescaling.
                const double keep = 1.0 - n.rate;
                const double scale = 1.0 / keep;
                Tensor mask(x.shape());
                for (std::size_t i = 0; i < mask.size(); ++i) {
                    mask[i] = rng->uniform() < keep ? scale : 0.0;
                }
                out = x;
                for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
                fp.dropout_masks[static_cast<std::size_t>(id)] = std::move(mask);
                break;
            }
            case LayerKind::GlobalAvgPool: {
                const std::size_t h = x.dim(1), w = x.dim(2), c = x.dim(3);
                const double inv = 1.0 / static_cast<double>(h * w);
                out = Tensor({batch, c});
                for (std::size_t s = 0; s < batch; ++s) {
                    const double* px = x.data() + s * h * w * c;
                    double* py = out.data() + s * c;
                    for (std::size_t i = 0; i < h * w; ++i) {
                        for (std::size_t ch = 0; ch < c; ++ch) py[ch] += px[i * c + ch];
                    }
                    for (std::size_t ch = 0; ch < c; ++ch) py[ch] *= inv;
                }
                break;
            }
            case LayerKind::Concat: {
                const Tensor& b = fp.activations[static_cast<std::size_t>(n.inputs[1])];
                const std::size_t wa = x.dim(1), wb = b.dim(1);
                out = Tensor({batch, wa + wb});
                for (std::size_t s = 0; s < batch; ++s) {
                    std::copy_n(x.data() + s * wa, wa, out.data() + s * (wa + wb));
                    std::copy_n(b.data() + s * wb, wb, out.data() + s * (wa + wb) + wa);
                }
                break;
            }
            case LayerKind::Add: {
                const Tensor& b = fp.activations[static_cast<std::size_t>(n.inputs[1])];
                out = x;
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
                break;
            }
            case LayerKind::Sigmoid: {
                out = x;
                for (double& v : out.values()) v = sigmoid(v);
                break;
            }
            case LayerKind::Input:
                break;
        }
    }
    fp.valid = true;
    return fp;
}

std::map<std::string, Tensor> backward(const ModelGraph& g, const ForwardPass& fp,
                                       const Tensor& loss_grad) {
    if (!fp.valid) throw StateError("backward called before forward");
    if (!fp.training) throw StateError("backward requires a training-mode forward pass");
    const Tensor& out_act = fp.activations[static_cast<std::size_t>(g.output())];
    if (loss_grad.shape() != out_act.shape()) {
        throw StructuralError("loss gradient shape " + shape_to_string(loss_grad.shape()) +
                              " does not match output activation " +
                              shape_to_string(out_act.shape()));
    }

    std::vector<Tensor> adj(static_cast<std::size_t>(g.node_count()));
    adj[static_cast<std::size_t>(g.output())] = loss_grad;

    std::map<std::string, Tensor> grads;
    auto record = [&](const std::string& name, Tensor grad) {
        if (!g.trainable(name)) return;  // frozen parameters receive no entry
        auto it = grads.find(name);
        if (it == grads.end()) {
            grads.emplace(name, std::move(grad));
        } else {
            Tensor& acc = it->second;
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += grad[i];
        }
    };
    auto accumulate = [&](int id, Tensor grad) {
        Tensor& a = adj[static_cast<std::size_t>(id)];
        if (a.empty()) {
            a = std::move(grad);
        } else {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += grad[i];
        }
    };

    for (int id = g.node_count() - 1; id >= 0; --id) {
        const Node& n = g.node(id);
        const Tensor& dy = adj[static_cast<std::size_t>(id)];
        if (dy.empty() || n.kind == LayerKind::Input) continue;
        const Tensor& x = fp.activations[static_cast<std::size_t>(n.inputs[0])];
        switch (n.kind) {
            case LayerKind::Dense: {
                DenseGrads dg = dense_backward_batch(x, g.param(n.weight_name), dy);
                record(n.weight_name, std::move(dg.weights));
                record(n.bias_name, std::move(dg.bias));
                accumulate(n.inputs[0], std::move(dg.input));
                break;
            }
            case LayerKind::Conv2D: {
                Conv2dGrads cg =
                    conv2d_backward_batch(x, g.param(n.weight_name), dy, n.stride, n.padding);
                record(n.weight_name, std::move(cg.kernels));
                record(n.bias_name, std::move(cg.bias));
                accumulate(n.inputs[0], std::move(cg.input));
                break;
            }
            case LayerKind::Relu: {
                Tensor dx = dy;
                for (std::size_t i = 0; i < dx.size(); ++i) {
                    if (x[i] <= 0.0) dx[i] = 0.0;
                }
                accumulate(n.inputs[0], std::move(dx));
                break;
            }
            case LayerKind::Dropout: {
                const Tensor& mask = fp.dropout_masks[static_cast<std::size_t>(id)];
                Tensor dx = dy;
                if (!mask.empty()) {
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
                }
                accumulate(n.inputs[0], std::move(dx));
                break;
            }
            case LayerKind::GlobalAvgPool: {
                const std::size_t h = x.dim(1), w = x.dim(2), c = x.dim(3);
                const double inv = 1.0 / static_cast<double>(h * w);
                Tensor dx(x.shape());
                for (std::size_t s = 0; s < fp.batch; ++s) {
                    const double* src = dy.data() + s * c;
                    double* dst = dx.data() + s * h * w * c;
                    for (std::size_t i = 0; i < h * w; ++i) {
                        for (std::size_t ch = 0; ch < c; ++ch) dst[i * c + ch] = src[ch] * inv;
                    }
                }
                accumulate(n.inputs[0], std::move(dx));
                break;
            }
            case LayerKind::Concat: {
                const Tensor& b = fp.activations[static_cast<std::size_t>(n.inputs[1])];
                const std::size_t wa = x.dim(1), wb = b.dim(1);
                Tensor da({fp.batch, wa});
                Tensor db({fp.batch, wb});
                for (std::size_t s = 0; s < fp.batch; ++s) {
                    std::copy_n(dy.data() + s * (wa + wb), wa, da.data() + s * wa);
                    std::copy_n(dy.data() + s * (wa + wb) + wa, wb, db.data() + s * wb);
                }
                accumulate(n.inputs[0], std::move(da));
                accumulate(n.inputs[1], std::move(db));
                break;
            }
            case LayerKind::Add: {
                accumulate(n.inputs[0], dy);
                accumulate(n.inputs[1], dy);
                break;
            }
            case LayerKind::Sigmoid: {
                const Tensor& y = fp.activations[static_cast<std::size_t>(id)];
                Tensor dx = dy;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
                accumulate(n.inputs[0], std::move(dx));
                break;
            }
            case LayerKind::Input:
                break;
        }
    }
    return grads;
}

}  // namespace bfuse
