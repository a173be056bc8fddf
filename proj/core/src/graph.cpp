#include "bfuse/graph.hpp"

#include <algorithm>
#include <cmath>

#include "bfuse/errors.hpp"
#include "bfuse/layers.hpp"

namespace bfuse {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Input: return "Input";
        case LayerKind::Dense: return "Dense";
        case LayerKind::Conv2D: return "Conv2D";
        case LayerKind::Relu: return "ReLU";
        case LayerKind::Dropout: return "Dropout";
        case LayerKind::GlobalAvgPool: return "GlobalAvgPool";
        case LayerKind::Concat: return "Concat";
        case LayerKind::Add: return "Add";
        case LayerKind::Sigmoid: return "Sigmoid";
    }
    return "?";
}

int ModelGraph::add_node(Node n) {
    if (find_node(n.name) >= 0) {
        throw StructuralError("duplicate node name: " + n.name);
    }
    for (int in : n.inputs) {
        if (in < 0 || in >= node_count()) {
            throw StructuralError("node " + n.name + " references unknown input id " +
                                  std::to_string(in));
        }
    }
    nodes_.push_back(std::move(n));
    return node_count() - 1;
}

void ModelGraph::check_new_param(const std::string& name) const {
    if (params_.count(name)) {
        throw StructuralError("duplicate parameter name: " + name);
    }
}

int ModelGraph::find_node(const std::string& name) const {
    for (int i = 0; i < node_count(); ++i) {
        if (nodes_[static_cast<std::size_t>(i)].name == name) return i;
    }
    return -1;
}

int ModelGraph::add_input(const std::string& name, std::vector<std::size_t> shape) {
    shape_product(shape);  // rejects zero dims
    Node n;
    n.name = name;
    n.kind = LayerKind::Input;
    n.output_shape = std::move(shape);
    const int id = add_node(std::move(n));
    inputs_.push_back(id);
    return id;
}

int ModelGraph::add_dense(const std::string& name, int input, std::size_t units, Rng& rng,
                          InitKind init) {
    if (units == 0) throw ValidationError("dense layer " + name + " needs units > 0");
    const Node& src = node(input);
    if (src.output_shape.size() != 1) {
        throw StructuralError("dense layer " + name + " expects a vector input, got shape " +
                              shape_to_string(src.output_shape));
    }
    const std::size_t fan_in = src.output_shape[0];
    const std::size_t fan_out = units;

    Node n;
    n.name = name;
    n.kind = LayerKind::Dense;
    n.inputs = {input};
    n.units = units;
    n.output_shape = {units};
    n.weight_name = name + ".W";
    n.bias_name = name + ".b";
    check_new_param(n.weight_name);
    check_new_param(n.bias_name);

    const double limit = init == InitKind::HeUniform
                             ? std::sqrt(6.0 / static_cast<double>(fan_in))
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_out, fan_in});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
    add_param(n.weight_name, std::move(w), true);
    add_param(n.bias_name, Tensor({fan_out}), true);
    return add_node(std::move(n));
}

int ModelGraph::add_conv2d(const std::string& name, int input, std::size_t filters,
                           std::size_t kernel, std::size_t stride, std::size_t padding,
                           Rng& rng) {
    if (filters == 0 || kernel == 0) {
        throw ValidationError("conv layer " + name + " needs filters > 0 and kernel > 0");
    }
    if (stride == 0) throw ValidationError("conv layer " + name + " needs stride > 0");
    const Node& src = node(input);
    if (src.output_shape.size() != 3) {
        throw StructuralError("conv layer " + name + " expects an HxWxC input, got shape " +
                              shape_to_string(src.output_shape));
    }
    const std::size_t in_h = src.output_shape[0];
    const std::size_t in_w = src.output_shape[1];
    const std::size_t in_c = src.output_shape[2];
    if (kernel > in_h + 2 * padding || kernel > in_w + 2 * padding) {
        throw StructuralError("conv layer " + name + ": kernel " + std::to_string(kernel) +
                              " exceeds padded input " + shape_to_string(src.output_shape));
    }
    const auto [out_h, out_w] = conv2d_output_dims(in_h, in_w, kernel, stride, padding);

    Node n;
    n.name = name;
    n.kind = LayerKind::Conv2D;
    n.inputs = {input};
    n.filters = filters;
    n.kernel = kernel;
    n.stride = stride;
    n.padding = padding;
    n.output_shape = {out_h, out_w, filters};
    n.weight_name = name + ".K";
    n.bias_name = name + ".b";
    check_new_param(n.weight_name);
    check_new_param(n.bias_name);

    const double fan_in = static_cast<double>(kernel * kernel * in_c);
    const double limit = std::sqrt(6.0 / fan_in);
    Tensor k({kernel, kernel, in_c, filters});
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.uniform(-limit, limit);
    add_param(n.weight_name, std::move(k), true);
    add_param(n.bias_name, Tensor({filters}), true);
    return add_node(std::move(n));
}

int ModelGraph::add_relu(const std::string& name, int input) {
    Node n;
    n.name = name;
    n.kind = LayerKind::Relu;
    n.inputs = {input};
    n.output_shape = node(input).output_shape;
    return add_node(std::move(n));
}

int ModelGraph::add_dropout(const std::string& name, int input, double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ValidationError("dropout layer " + name + " needs rate in [0,1), got " +
                              std::to_string(rate));
    }
    Node n;
    n.name = name;
    n.kind = LayerKind::Dropout;
    n.inputs = {input};
    n.rate = rate;
    n.output_shape = node(input).output_shape;
    return add_node(std::move(n));
}

int ModelGraph::add_global_avg_pool(const std::string& name, int input) {
    const Node& src = node(input);
    if (src.output_shape.size() != 3) {
        throw StructuralError("global average pool " + name + " expects an HxWxC input");
    }
    Node n;
    n.name = name;
    n.kind = LayerKind::GlobalAvgPool;
    n.inputs = {input};
    n.output_shape = {src.output_shape[2]};
    return add_node(std::move(n));
}

int ModelGraph::add_concat(const std::string& name, int a, int b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.output_shape.size() != 1 || nb.output_shape.size() != 1) {
        throw StructuralError("concat " + name + " expects two vector inputs");
    }
    Node n;
    n.name = name;
    n.kind = LayerKind::Concat;
    n.inputs = {a, b};
    n.output_shape = {na.output_shape[0] + nb.output_shape[0]};
    return add_node(std::move(n));
}

int ModelGraph::add_add(const std::string& name, int a, int b) {
    if (node(a).output_shape != node(b).output_shape) {
        throw StructuralError("add " + name + " requires equal input shapes, got " +
                              shape_to_string(node(a).output_shape) + " and " +
                              shape_to_string(node(b).output_shape));
    }
    Node n;
    n.name = name;
    n.kind = LayerKind::Add;
    n.inputs = {a, b};
    n.output_shape = node(a).output_shape;
    return add_node(std::move(n));
}

int ModelGraph::add_sigmoid(const std::string& name, int input) {
    Node n;
    n.name = name;
    n.kind = LayerKind::Sigmoid;
    n.inputs = {input};
    n.output_shape = node(input).output_shape;
    return add_node(std::move(n));
}

int ModelGraph::input_id(const std::string& name) const {
    for (int id : inputs_) {
        if (node(id).name == name) return id;
    }
    return -1;
}

void ModelGraph::set_output(int id) {
    if (id < 0 || id >= node_count()) throw StructuralError("output node id out of range");
    output_ = id;
}

Tensor& ModelGraph::param(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw StructuralError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ModelGraph::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw StructuralError("unknown parameter: " + name);
    return it->second;
}

bool ModelGraph::has_param(const std::string& name) const {
    return params_.count(name) > 0;
}

bool ModelGraph::trainable(const std::string& name) const {
    auto it = trainable_.find(name);
    if (it == trainable_.end()) throw StructuralError("unknown parameter: " + name);
    return it->second;
}

void ModelGraph::set_trainable(const std::string& name, bool t) {
    if (!params_.count(name)) throw StructuralError("unknown parameter: " + name);
    trainable_[name] = t;
}

void ModelGraph::set_all_trainable(bool t) {
    for (auto& [name, flag] : trainable_) flag = t;
}

std::size_t ModelGraph::param_count() const {
    std::size_t n = 0;
    for (const auto& name : param_order_) n += params_.at(name).size();
    return n;
}

void ModelGraph::add_param(const std::string& name, Tensor value, bool trainable) {
    check_new_param(name);
    param_order_.push_back(name);
    params_.emplace(name, std::move(value));
    trainable_[name] = trainable;
}

std::vector<int> ModelGraph::absorb_subgraph(const ModelGraph& src, int upto,
                                             const std::string& prefix,
                                             const std::map<int, int>& input_map) {
    if (upto < 0 || upto >= src.node_count()) {
        throw StructuralError("absorb_subgraph: node id out of range");
    }
    // Ancestors of `upto`, including itself.
    std::vector<bool> needed(static_cast<std::size_t>(src.node_count()), false);
    needed[static_cast<std::size_t>(upto)] = true;
    for (int i = upto; i >= 0; --i) {
        if (!needed[static_cast<std::size_t>(i)]) continue;
        for (int in : src.node(i).inputs) needed[static_cast<std::size_t>(in)] = true;
    }

    std::vector<int> mapping(static_cast<std::size_t>(src.node_count()), -1);
    for (int i = 0; i <= upto; ++i) {
        if (!needed[static_cast<std::size_t>(i)]) continue;
        const Node& sn = src.node(i);
        if (sn.kind == LayerKind::Input) {
            auto it = input_map.find(i);
            if (it == input_map.end()) {
                throw StructuralError("absorb_subgraph: no mapping for input node " + sn.name);
            }
            if (node(it->second).output_shape != sn.output_shape) {
                throw StructuralError("absorb_subgraph: input shape mismatch for " + sn.name);
            }
            mapping[static_cast<std::size_t>(i)] = it->second;
            continue;
        }
        Node n = sn;
        n.name = prefix + sn.name;
        for (int& in : n.inputs) in = mapping[static_cast<std::size_t>(in)];
        if (!n.weight_name.empty()) {
            n.weight_name = prefix + sn.weight_name;
            add_param(n.weight_name, src.param(sn.weight_name), src.trainable(sn.weight_name));
        }
        if (!n.bias_name.empty()) {
            n.bias_name = prefix + sn.bias_name;
            add_param(n.bias_name, src.param(sn.bias_name), src.trainable(sn.bias_name));
        }
        mapping[static_cast<std::size_t>(i)] = add_node(std::move(n));
    }
    return mapping;
}

}  // namespace bfuse
