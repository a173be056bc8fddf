#include "bfuse/models.hpp"

#include <cstdio>

#include "bfuse/errors.hpp"

namespace bfuse {

void CnnSpec::validate() const {
    if (filters == 0) throw ValidationError("cnn spec: filters must be positive");
    if (stem_kernel == 0) throw ValidationError("cnn spec: stem kernel must be positive");
    if (stem_stride == 0) throw ValidationError("cnn spec: stem stride must be positive");
}

void MlpSpec::validate() const {
    static constexpr std::size_t kDepths[] = {2, 3, 4, 5};
    static constexpr std::size_t kWidths[] = {16, 32, 64, 128, 256};
    bool depth_ok = false, width_ok = false;
    for (std::size_t d : kDepths) depth_ok |= d == depth;
    for (std::size_t w : kWidths) width_ok |= w == width;
    if (!depth_ok) {
        throw ValidationError("mlp spec: depth " + std::to_string(depth) +
                              " outside the grid {2,3,4,5}");
    }
    if (!width_ok) {
        throw ValidationError("mlp spec: width " + std::to_string(width) +
                              " outside the grid {16,32,64,128,256}");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ValidationError("mlp spec: dropout rate must be in [0,1)");
    }
}

ModelGraph build_cnn(const CnnSpec& spec, std::array<std::size_t, 3> input_shape, Rng& rng) {
    spec.validate();
    ModelGraph g;
    const int image = g.add_input("image", {input_shape[0], input_shape[1], input_shape[2]});
    int x = g.add_conv2d("stem", image, spec.filters, spec.stem_kernel, spec.stem_stride,
                         /*padding=*/0, rng);
    x = g.add_relu("stem_relu", x);
    for (std::size_t b = 0; b < spec.blocks; ++b) {
        const std::string base = "block" + std::to_string(b);
        const int skip = x;
        int y = g.add_conv2d(base + "_conv1", x, spec.filters, 3, 1, 1, rng);
        y = g.add_relu(base + "_relu1", y);
        y = g.add_conv2d(base + "_conv2", y, spec.filters, 3, 1, 1, rng);
        y = g.add_add(base + "_add", y, skip);
        x = g.add_relu(base + "_relu2", y);
    }
    const int pooled = g.add_global_avg_pool("pool", x);
    g.tag_penultimate(pooled);
    const int logits = g.add_dense("classifier", pooled, 1, rng, InitKind::GlorotUniform);
    const int out = g.add_sigmoid("output", logits);
    g.set_output(out);
    return g;
}

ModelGraph build_mlp(const MlpSpec& spec, std::size_t n_features, Rng& rng) {
    spec.validate();
    if (n_features == 0) throw ValidationError("mlp needs at least one input feature");
    ModelGraph g;
    int x = g.add_input("features", {n_features});
    for (std::size_t d = 0; d < spec.depth; ++d) {
        const std::string base = "hidden" + std::to_string(d);
        x = g.add_dense(base, x, spec.width, rng, InitKind::HeUniform);
        x = g.add_relu(base + "_relu", x);
        x = g.add_dropout(base + "_drop", x, spec.dropout_rate);
    }
    g.tag_penultimate(x);
    const int logits = g.add_dense("classifier", x, 1, rng, InitKind::GlorotUniform);
    const int out = g.add_sigmoid("output", logits);
    g.set_output(out);
    return g;
}

namespace {

void require_penultimate(const ModelGraph& g, const char* which) {
    if (g.penultimate() < 0) {
        throw StructuralError(std::string(which) + " model has no tagged penultimate node");
    }
}

void require_all_trainable(const ModelGraph& g, const char* which) {
    for (const auto& name : g.param_names()) {
        if (!g.trainable(name)) {
            throw ValidationError(std::string(which) + " model has frozen parameter " + name +
                                  "; parallel fusion trains both branches");
        }
    }
}

std::string cnn_feature_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cnn_%03zu", i);
    return buf;
}

}  // namespace

ModelGraph fuse_parallel(const ModelGraph& cnn, const ModelGraph& mlp, Rng& rng) {
    require_penultimate(cnn, "cnn");
    require_penultimate(mlp, "mlp");
    require_all_trainable(cnn, "cnn");
    require_all_trainable(mlp, "mlp");

    const Node& cnn_input = cnn.node(cnn.input_ids().at(0));
    const Node& mlp_input = mlp.node(mlp.input_ids().at(0));

    ModelGraph g;
    const int image = g.add_input("image", cnn_input.output_shape);
    const int features = g.add_input("features", mlp_input.output_shape);

    const auto cnn_map = g.absorb_subgraph(cnn, cnn.penultimate(), "cnn.",
                                           {{cnn.input_ids().at(0), image}});
    const auto mlp_map = g.absorb_subgraph(mlp, mlp.penultimate(), "mlp.",
                                           {{mlp.input_ids().at(0), features}});

    // CNN features first; the order is part of the checkpoint contract.
    const int cnn_pen = cnn_map[static_cast<std::size_t>(cnn.penultimate())];
    const int mlp_pen = mlp_map[static_cast<std::size_t>(mlp.penultimate())];
    const int fused = g.add_concat("fusion", cnn_pen, mlp_pen);
    g.tag_penultimate(fused);
    const int logits = g.add_dense("head", fused, 1, rng, InitKind::GlorotUniform);
    const int out = g.add_sigmoid("output", logits);
    g.set_output(out);
    return g;
}

SequentialFusion fuse_sequential(const ModelGraph& frozen_cnn, const ImageDataset& images,
                                 const DescriptorTable& descriptors, const MlpSpec& mlp_spec,
                                 std::span<const std::size_t> train_rows, Rng& rng) {
    require_penultimate(frozen_cnn, "cnn");
    mlp_spec.validate();
    if (descriptors.sample_ids() != images.ids) {
        throw ValidationError("sequential fusion: descriptor rows are not aligned with images");
    }
    if (descriptors.has_missing()) {
        throw ValidationError("sequential fusion: impute descriptors first");
    }
    if (train_rows.empty()) {
        throw ValidationError("sequential fusion: no training rows given");
    }

    SequentialFusion out;
    out.cnn = frozen_cnn;
    out.cnn.set_all_trainable(false);

    // Descriptor columns first, harvested CNN features after.
    const DescriptorTable cnn_features = cnn_feature_table(out.cnn, images);
    const DescriptorTable augmented_raw = hconcat(descriptors, cnn_features);

    const DescriptorTable train_slice = subset_rows(augmented_raw, train_rows);
    auto [train_std, stats] = standardize(train_slice);
    (void)train_std;
    out.stats = std::move(stats);
    out.augmented = standardize_with(augmented_raw, out.stats);
    out.mlp = build_mlp(mlp_spec, out.augmented.n_features(), rng);
    return out;
}

Tensor penultimate_features(const ModelGraph& model, const Tensor& batched_input) {
    require_penultimate(model, "this");
    const Node& input = model.node(model.input_ids().at(0));
    ForwardPass fp = forward(model, {{input.name, batched_input}}, /*training=*/false);
    return fp.activations[static_cast<std::size_t>(model.penultimate())];
}

Tensor penultimate_features(const ModelGraph& model, const ChemImage& image) {
    const std::vector<std::size_t>& s = image.pixels.shape();
    Tensor batched({1, s[0], s[1], s[2]}, image.pixels.values());
    Tensor features = penultimate_features(model, batched);
    return Tensor({features.dim(1)}, features.values());
}

DescriptorTable cnn_feature_table(const ModelGraph& model, const ImageDataset& images) {
    require_penultimate(model, "cnn");
    if (images.size() == 0) throw ValidationError("cannot harvest features from an empty dataset");

    constexpr std::size_t kChunk = 64;
    std::vector<double> values;
    std::size_t width = 0;
    for (std::size_t start = 0; start < images.size(); start += kChunk) {
        const std::size_t n = std::min(kChunk, images.size() - start);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
        const Tensor feats = penultimate_features(model, image_batch(images, idx));
        width = feats.dim(1);
        values.insert(values.end(), feats.values().begin(), feats.values().end());
    }
    std::vector<std::string> names;
    names.reserve(width);
    for (std::size_t i = 0; i < width; ++i) names.push_back(cnn_feature_name(i));
    return DescriptorTable(images.ids, std::move(names), std::move(values));
}

}  // namespace bfuse
