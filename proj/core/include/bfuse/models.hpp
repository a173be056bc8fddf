#pragma once

#include <array>
#include <span>

#include "bfuse/dataset.hpp"
#include "bfuse/descriptors.hpp"
#include "bfuse/graph.hpp"
#include "bfuse/rng.hpp"

namespace bfuse {

// Image-branch architecture: a strided stem convolution, a stack of
// residual blocks (conv-relu-conv with identity skip, then relu), global
// average pooling into the penultimate feature vector, and a sigmoid
// classifier head. The penultimate width equals `filters`.
struct CnnSpec {
    std::size_t filters = 16;
    std::size_t blocks = 3;
    std::size_t stem_kernel = 4;
    std::size_t stem_stride = 2;

    void validate() const;
};

// Descriptor-branch architecture: `depth` hidden layers of `width` neurons,
// ReLU activations, dropout after each hidden layer, sigmoid classifier.
struct MlpSpec {
    std::size_t depth = 2;
    std::size_t width = 128;
    double dropout_rate = 0.5;

    void validate() const;  // depth in {2,3,4,5}, width in {16,32,64,128,256}
};

// Input shape is (height, width, channels); (80, 80, 4) by default.
ModelGraph build_cnn(const CnnSpec& spec, std::array<std::size_t, 3> input_shape, Rng& rng);

ModelGraph build_mlp(const MlpSpec& spec, std::size_t n_features, Rng& rng);

// Joint two-branch model: both penultimate vectors are concatenated (CNN
// features first) into one fresh sigmoid classifier layer. The sub-models'
// classifier heads are discarded; every remaining parameter is trainable.
ModelGraph fuse_parallel(const ModelGraph& cnn, const ModelGraph& mlp, Rng& rng);

struct SequentialFusion {
    ModelGraph cnn;             // copy of the feature extractor, fully frozen
    DescriptorTable augmented;  // standardized [descriptors | cnn features], all rows
    StandardizeStats stats;     // learned on train_rows only
    ModelGraph mlp;             // fresh MLP over the augmented feature width
};

// Two-stage fusion: runs the frozen CNN over every image, appends the
// penultimate vectors as feature columns "cnn_000".. after the descriptor
// columns, standardizes the augmented table with train-fold statistics
// (constant columns drop out), and builds a fresh MLP on the result.
// `descriptors` must be imputed and row-aligned with `images`.
SequentialFusion fuse_sequential(const ModelGraph& frozen_cnn, const ImageDataset& images,
                                 const DescriptorTable& descriptors, const MlpSpec& mlp_spec,
                                 std::span<const std::size_t> train_rows, Rng& rng);

// Penultimate activations for a batch, dropout off; shape (N, width).
Tensor penultimate_features(const ModelGraph& model, const Tensor& batched_input);

// Single-image convenience; returns a (width,) vector.
Tensor penultimate_features(const ModelGraph& model, const ChemImage& image);

// Harvested penultimate vectors for a whole dataset as a descriptor table
// with columns "cnn_000".."cnn_NNN".
DescriptorTable cnn_feature_table(const ModelGraph& model, const ImageDataset& images);

}  // namespace bfuse
