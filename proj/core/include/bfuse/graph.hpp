#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bfuse/rng.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

enum class LayerKind {
    Input,
    Dense,
    Conv2D,
    Relu,
    Dropout,
    GlobalAvgPool,
    Concat,
    Add,
    Sigmoid,
};

const char* layer_kind_name(LayerKind k);

// One layer instance in the DAG. output_shape is per-sample (no batch dim).
struct Node {
    std::string name;
    LayerKind kind = LayerKind::Input;
    std::vector<int> inputs;
    std::vector<std::size_t> output_shape;

    // Dense
    std::size_t units = 0;
    // Conv2D (square kernel, symmetric padding, cross-correlation convention)
    std::size_t filters = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    // Dropout
    double rate = 0.0;

    std::string weight_name;  // empty when the layer has no parameters
    std::string bias_name;
};

enum class InitKind { HeUniform, GlorotUniform };

// Static computation graph with named parameters. Nodes are stored in
// topological order (construction order; inputs must precede consumers).
class ModelGraph {
public:
    int add_input(const std::string& name, std::vector<std::size_t> shape);
    int add_dense(const std::string& name, int input, std::size_t units, Rng& rng,
                  InitKind init = InitKind::HeUniform);
    int add_conv2d(const std::string& name, int input, std::size_t filters, std::size_t kernel,
                   std::size_t stride, std::size_t padding, Rng& rng);
    int add_relu(const std::string& name, int input);
    int add_dropout(const std::string& name, int input, double rate);
    int add_global_avg_pool(const std::string& name, int input);
    int add_concat(const std::string& name, int a, int b);
    int add_add(const std::string& name, int a, int b);
    int add_sigmoid(const std::string& name, int input);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int find_node(const std::string& name) const;  // -1 when absent

    // Inputs, in declaration order.
    const std::vector<int>& input_ids() const { return inputs_; }
    int input_id(const std::string& name) const;

    int output() const { return output_; }
    void set_output(int id);

    void tag_penultimate(int id) { penultimate_ = id; }
    int penultimate() const { return penultimate_; }  // -1 when untagged

    // Parameters, in declaration order.
    const std::vector<std::string>& param_names() const { return param_order_; }
    Tensor& param(const std::string& name);
    const Tensor& param(const std::string& name) const;
    bool has_param(const std::string& name) const;
    bool trainable(const std::string& name) const;
    void set_trainable(const std::string& name, bool t);
    void set_all_trainable(bool t);
    std::size_t param_count() const;  // total scalar parameters

    // Registers a parameter directly (used by graph surgery and loaders).
    void add_param(const std::string& name, Tensor value, bool trainable);

    // Copies src's nodes up to and including `upto` into this graph, renaming
    // nodes/params with `prefix` and remapping src input nodes per input_map.
    // Returns mapping from src node id to new id.
    std::vector<int> absorb_subgraph(const ModelGraph& src, int upto, const std::string& prefix,
                                     const std::map<int, int>& input_map);

private:
    int add_node(Node n);
    void check_new_param(const std::string& name) const;

    std::vector<Node> nodes_;
    std::vector<int> inputs_;
    int output_ = -1;
    int penultimate_ = -1;

    std::vector<std::string> param_order_;
    std::map<std::string, Tensor> params_;
    std::map<std::string, bool> trainable_;
};

// Result of one forward pass; owns everything backward needs (activations and
// the dropout masks drawn during training). Pure data, safe to move around.
struct ForwardPass {
    bool valid = false;
    bool training = false;
    std::size_t batch = 0;
    std::vector<Tensor> activations;  // per node id
    std::vector<Tensor> dropout_masks;  // per node id; empty unless drawn
};

// Runs the graph on a batch. Input tensors carry a leading batch dimension
// followed by the declared per-sample shape. `rng` is required only when
// training with dropout layers present.
ForwardPass forward(const ModelGraph& g, const std::map<std::string, Tensor>& inputs,
                    bool training, Rng* rng = nullptr);

// Gradients of the scalar loss w.r.t. every trainable parameter, given
// d(loss)/d(output activation). Frozen parameters receive no entry.
std::map<std::string, Tensor> backward(const ModelGraph& g, const ForwardPass& fp,
                                       const Tensor& loss_grad);

}  // namespace bfuse
