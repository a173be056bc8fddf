#pragma once

#include <string>

#include "bfuse/checkpoint.hpp"
#include "bfuse/graph.hpp"
#include "bfuse/train.hpp"

namespace bfuse {

struct PretrainResult {
    Checkpoint trunk;  // stem + blocks + pooling; the regression head is discarded
    TrainHistory history;
};

// Weak-supervision pretraining: the CNN classifier head is replaced by a
// linear regression head over the penultimate vector and the network is
// trained with mean-squared error against computed descriptor targets (no
// measured labels involved). Targets must be standardized with statistics
// from the training rows. The returned checkpoint keeps only the trunk
// parameters, named exactly as in the source CNN, so it loads into a fresh
// classifier graph for fine-tuning.
PretrainResult pretrain_weak(const ModelGraph& cnn, const DataView& train_data,
                             const DataView& val_data, const TrainConfig& config,
                             std::string arch_json = "");

}  // namespace bfuse
