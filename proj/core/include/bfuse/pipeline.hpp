#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfuse/checkpoint.hpp"
#include "bfuse/dataset.hpp"
#include "bfuse/descriptors.hpp"
#include "bfuse/mol.hpp"
#include "bfuse/predictor.hpp"
#include "bfuse/pretrain.hpp"
#include "bfuse/train.hpp"

namespace bfuse {

// Raw inputs as loaded from disk, before alignment or preprocessing.
struct PipelineData {
    std::optional<ImageDataset> images;
    std::vector<MolecularGraph> molecules;       // aligned with images when present
    std::optional<DescriptorTable> descriptors;  // raw, missing cells allowed
    std::map<std::string, int> labels;           // overrides archive labels when set

    // Master sample-id order: image archive order when images are present,
    // descriptor row order otherwise.
    std::vector<std::string> master_ids() const;
    // Label per master id: explicit map first, then archive labels, else -1.
    std::vector<int> resolve_labels() const;
};

struct FamilyTrainRequest {
    std::string family;  // "cnn" | "mlp" | "parallel" | "sequential"
    CnnSpec cnn_spec;
    MlpSpec mlp_spec;
    std::optional<Checkpoint> cnn_checkpoint;  // sequential: the frozen feature extractor
    std::optional<Checkpoint> init_trunk;      // cnn: fine-tune from a pretrained trunk
    bool finetune_head_only = false;           // cnn: freeze the loaded trunk
    std::vector<std::string> feature_selection;  // empty = every descriptor column
    TrainConfig train;
};

struct TrainedModel {
    Predictor predictor;
    TrainHistory history;
};

// Builds, preprocesses, and trains one model family on the given id split.
// Imputation and standardization statistics are learned on the training ids
// only and embedded in the returned predictor.
TrainedModel train_family(const FamilyTrainRequest& req, const PipelineData& data,
                          std::span<const std::string> train_ids,
                          std::span<const std::string> val_ids);

struct PretrainRequest {
    CnnSpec cnn_spec;
    std::vector<std::string> target_features;  // descriptor columns to regress
    TrainConfig train;
};

// Weak-supervision pretraining against computed descriptor columns (no
// measured labels). Targets are standardized on the training ids. Returns a
// trunk checkpoint that train_family can fine-tune from.
PretrainResult pretrain_cnn(const PretrainRequest& req, const PipelineData& data,
                            std::span<const std::string> train_ids,
                            std::span<const std::string> val_ids);

// Rebuilds a CNN suitable for penultimate-feature extraction from either a
// full "cnn" predictor checkpoint or a pretrained trunk checkpoint.
ModelGraph load_cnn_for_features(const Checkpoint& ckpt);

// Probabilities + labels for an id list, through a predictor or ensemble.
std::vector<int> labels_for_ids(const PipelineData& data,
                                std::span<const std::string> ids);

}  // namespace bfuse
