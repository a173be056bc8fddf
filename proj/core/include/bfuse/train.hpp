#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfuse/dataset.hpp"
#include "bfuse/errors.hpp"
#include "bfuse/graph.hpp"
#include "bfuse/mol.hpp"
#include "bfuse/optimizer.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

// One aligned collection of samples: every optional modality, when present,
// is row-aligned with `ids`. Training and evaluation work on row views.
struct SampleStore {
    std::vector<std::string> ids;
    std::vector<int> labels;                 // 1 RB, 0 NRB, -1 unlabeled
    std::optional<ImageDataset> images;      // image modality
    std::vector<MolecularGraph> molecules;   // for rotation augmentation; empty or aligned
    std::optional<Tensor> features;          // (n, f), standardized descriptor matrix
    std::optional<Tensor> targets;           // (n, t), regression targets

    std::size_t size() const { return ids.size(); }
    void validate() const;
};

// Row subset of a store. Non-owning; the store must outlive the view.
struct DataView {
    const SampleStore* store = nullptr;
    std::vector<std::size_t> rows;

    std::size_t size() const { return rows.size(); }
    static DataView all(const SampleStore& s);
    static DataView of(const SampleStore& s, std::span<const std::size_t> rows);
    // Rows whose ids are in `ids`, in the order the ids come in.
    static DataView by_ids(const SampleStore& s, std::span<const std::string> ids);
};

enum class LossKind { BinaryCrossEntropy, MeanSquaredError };

struct TrainConfig {
    OptimizerConfig optimizer;
    std::size_t patience = 50;  // epochs without validation-loss improvement
    bool augment = false;       // fresh rotation per image sample per epoch
    std::uint64_t seed = 0;
    LossKind loss = LossKind::BinaryCrossEntropy;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_er = 0.0;  // NaN when undefined (regression / one-class fold)
};

struct TrainHistory {
    std::vector<EpochStats> epochs;  // epochs[i] is epoch i+1
    std::size_t best_epoch = 0;      // 1-based; epoch with minimum validation loss
    std::string stop_reason;         // "early" | "max_epochs"
};

// Thrown when a non-finite loss aborts training; carries the history so far.
class TrainingDiverged : public NumericError {
public:
    TrainingDiverged(const std::string& msg, TrainHistory history)
        : NumericError(msg), history_(std::move(history)) {}
    const TrainHistory& history() const { return history_; }

private:
    TrainHistory history_;
};

// Early-stopping policy: a new best requires a strictly lower validation
// loss; training stops once `patience` consecutive epochs after the best
// show no improvement.
class EarlyStopMonitor {
public:
    explicit EarlyStopMonitor(std::size_t patience);

    // Feed epochs in order (1-based); returns true when training should stop.
    bool observe(std::size_t epoch, double val_loss);

    bool improved_last() const { return improved_last_; }
    std::size_t best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    std::size_t patience_;
    std::size_t best_epoch_ = 0;
    double best_loss_ = 0.0;
    std::size_t bad_streak_ = 0;
    bool improved_last_ = false;
    bool seen_any_ = false;
};

// Mini-batch RMSprop training with early stopping on the validation loss.
// Epochs iterate shuffled batches (shuffling is a pure function of seed and
// epoch; the final partial batch is kept). With augmentation on, every train
// image is re-rasterized from its molecule with a fresh uniform rotation in
// [0, 180] degrees each epoch; validation data is never augmented. The
// parameters left in `model` are those of the best epoch.
TrainHistory train(ModelGraph& model, const DataView& train_data, const DataView& val_data,
                   const TrainConfig& config);

// Assembles the named input tensors a graph needs for the given view rows.
// Exposed for evaluation code paths; no augmentation.
std::map<std::string, Tensor> assemble_inputs(const ModelGraph& model, const DataView& view,
                                              std::span<const std::size_t> view_positions);

// Probabilities (classifier output column 0) for a whole view, batched.
std::vector<double> predict_probabilities(const ModelGraph& model, const DataView& view);

}  // namespace bfuse
