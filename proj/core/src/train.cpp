#include "bfuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bfuse/errors.hpp"
#include "bfuse/loss.hpp"
#include "bfuse/metrics.hpp"
#include "bfuse/raster.hpp"
#include "bfuse/rng.hpp"

namespace bfuse {

namespace {

// Substream tags for the per-epoch random streams.
constexpr std::uint64_t kShuffleTag = 0x73687566;
constexpr std::uint64_t kDropoutTag = 0x64726f70;
constexpr std::uint64_t kAugmentTag = 0x61756d67;

Rng epoch_rng(std::uint64_t seed, std::uint64_t tag, std::size_t epoch) {
    return Rng(Rng::mix(Rng::mix(seed, tag), static_cast<std::uint64_t>(epoch)));
}

}  // namespace

void SampleStore::validate() const {
    const std::size_t n = ids.size();
    if (!labels.empty() && labels.size() != n) {
        throw ValidationError("sample store: labels not aligned with ids");
    }
    if (images && images->size() != n) {
        throw ValidationError("sample store: images not aligned with ids");
    }
    if (images && images->ids != ids) {
        throw ValidationError("sample store: image ids differ from store ids");
    }
    if (!molecules.empty() && molecules.size() != n) {
        throw ValidationError("sample store: molecules not aligned with ids");
    }
    if (features && (features->rank() != 2 || features->dim(0) != n)) {
        throw ValidationError("sample store: feature matrix not aligned with ids");
    }
    if (targets && (targets->rank() != 2 || targets->dim(0) != n)) {
        throw ValidationError("sample store: target matrix not aligned with ids");
    }
}

DataView DataView::all(const SampleStore& s) {
    DataView v;
    v.store = &s;
    v.rows.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v.rows[i] = i;
    return v;
}

DataView DataView::of(const SampleStore& s, std::span<const std::size_t> rows) {
    DataView v;
    v.store = &s;
    v.rows.assign(rows.begin(), rows.end());
    for (std::size_t r : v.rows) {
        if (r >= s.size()) throw ValidationError("data view row out of range");
    }
    return v;
}

DataView DataView::by_ids(const SampleStore& s, std::span<const std::string> ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < s.size(); ++i) index[s.ids[i]] = i;
    DataView v;
    v.store = &s;
    v.rows.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw ValidationError("sample id not present in the store: " + id);
        }
        v.rows.push_back(it->second);
    }
    return v;
}

void TrainConfig::validate() const {
    optimizer.validate();
    if (patience < 1) throw ValidationError("early-stopping patience must be >= 1");
}

EarlyStopMonitor::EarlyStopMonitor(std::size_t patience) : patience_(patience) {
    if (patience_ < 1) throw ValidationError("early-stopping patience must be >= 1");
}

bool EarlyStopMonitor::observe(std::size_t epoch, double val_loss) {
    if (!seen_any_ || val_loss < best_loss_) {
        seen_any_ = true;
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        bad_streak_ = 0;
        improved_last_ = true;
        return false;
    }
    improved_last_ = false;
    ++bad_streak_;
    return bad_streak_ >= patience_;
}

namespace {

struct BatchInputs {
    std::map<std::string, Tensor> tensors;
};

// Gathers one named input tensor for the rows at the given view positions.
Tensor gather_input(const std::string& input_name, const std::vector<std::size_t>& node_shape,
                    const DataView& view, std::span<const std::size_t> positions,
                    Rng* augment_rng) {
    const SampleStore& store = *view.store;
    if (input_name == "image") {
        if (!store.images) throw ValidationError("model needs images but the store has none");
        const ImageDataset& ds = *store.images;
        const std::size_t per = ds.pixels_per_sample();
        Tensor batch({positions.size(), ds.spec.height_px, ds.spec.width_px,
                      RasterSpec::kChannels});
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const std::size_t row = view.rows[positions[i]];
            double* dst = batch.data() + i * per;
            if (augment_rng != nullptr) {
                if (store.molecules.empty()) {
                    throw ValidationError(
                        "augmentation requires molecules to re-rasterize; none in the store");
                }
                const double angle = augment_rng->uniform(0.0, 180.0);
                const ChemImage img =
                    rasterize(rotate_molecule(store.molecules[row], angle), ds.spec);
                for (std::size_t j = 0; j < per; ++j) dst[j] = img.pixels[j];
            } else {
                const auto& px = ds.pixels[row];
                for (std::size_t j = 0; j < per; ++j) dst[j] = static_cast<double>(px[j]);
            }
        }
        return batch;
    }
    if (input_name == "features") {
        if (!store.features) {
            throw ValidationError("model needs descriptor features but the store has none");
        }
        const Tensor& all = *store.features;
        const std::size_t f = all.dim(1);
        if (node_shape.size() == 1 && node_shape[0] != f) {
            throw StructuralError("feature width " + std::to_string(f) +
                                  " does not match the model input " +
                                  std::to_string(node_shape[0]));
        }
        Tensor batch({positions.size(), f});
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const std::size_t row = view.rows[positions[i]];
            std::copy_n(all.data() + row * f, f, batch.data() + i * f);
        }
        return batch;
    }
    throw StructuralError("graph input '" + input_name + "' has no data source");
}

BatchInputs make_batch(const ModelGraph& model, const DataView& view,
                       std::span<const std::size_t> positions, Rng* augment_rng) {
    BatchInputs b;
    for (int id : model.input_ids()) {
        const Node& n = model.node(id);
        b.tensors.emplace(n.name,
                          gather_input(n.name, n.output_shape, view, positions, augment_rng));
    }
    return b;
}

std::vector<int> gather_labels(const DataView& view, std::span<const std::size_t> positions) {
    std::vector<int> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const int label = view.store->labels.at(view.rows[positions[i]]);
        if (label != 0 && label != 1) {
            throw ValidationError("unlabeled sample in a labeled training view: " +
                                  view.store->ids[view.rows[positions[i]]]);
        }
        out[i] = label;
    }
    return out;
}

Tensor gather_targets(const DataView& view, std::span<const std::size_t> positions) {
    const Tensor& all = *view.store->targets;
    const std::size_t t = all.dim(1);
    Tensor out({positions.size(), t});
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::copy_n(all.data() + view.rows[positions[i]] * t, t, out.data() + i * t);
    }
    return out;
}

// Loss and gradient on the output activations for one batch.
std::pair<double, Tensor> batch_loss(const Tensor& output, const DataView& view,
                                     std::span<const std::size_t> positions, LossKind kind) {
    if (kind == LossKind::BinaryCrossEntropy) {
        const std::vector<int> labels = gather_labels(view, positions);
        return {mean_bce(output, labels), mean_bce_grad(output, labels)};
    }
    if (!view.store->targets) {
        throw ValidationError("MSE training requires target values in the store");
    }
    const Tensor targets = gather_targets(view, positions);
    return {mean_mse(output, targets), mean_mse_grad(output, targets)};
}

// Validation pass: mean loss plus the balanced error rate at threshold 0.5
// (NaN when not applicable), dropout off.
std::pair<double, double> validate_pass(const ModelGraph& model, const DataView& view,
                                        LossKind kind) {
    constexpr std::size_t kChunk = 256;
    double total_loss = 0.0;
    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t start = 0; start < view.size(); start += kChunk) {
        const std::size_t n = std::min(kChunk, view.size() - start);
        std::vector<std::size_t> pos(n);
        for (std::size_t i = 0; i < n; ++i) pos[i] = start + i;
        const BatchInputs inputs = make_batch(model, view, pos, nullptr);
        const ForwardPass fp = forward(model, inputs.tensors, /*training=*/false);
        const Tensor& out = fp.activations[static_cast<std::size_t>(model.output())];
        if (kind == LossKind::BinaryCrossEntropy) {
            const std::vector<int> batch_labels = gather_labels(view, pos);
            for (std::size_t i = 0; i < n; ++i) {
                total_loss += binary_cross_entropy(out[i], batch_labels[i]);
                probs.push_back(out[i]);
                labels.push_back(batch_labels[i]);
            }
        } else {
            const Tensor targets = gather_targets(view, pos);
            total_loss += mean_mse(out, targets) * static_cast<double>(out.size());
        }
    }
    double er = std::numeric_limits<double>::quiet_NaN();
    double loss;
    if (kind == LossKind::BinaryCrossEntropy) {
        loss = total_loss / static_cast<double>(view.size());
        std::vector<int> preds(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = classify(probs[i]);
        const ConfusionCounts counts = confusion(preds, labels);
        if (counts.tp + counts.fn > 0 && counts.tn + counts.fp > 0) {
            er = metrics(counts).er;
        }
    } else {
        const std::size_t t = view.store->targets->dim(1);
        loss = total_loss / static_cast<double>(view.size() * t);
    }
    return {loss, er};
}

}  // namespace

TrainHistory train(ModelGraph& model, const DataView& train_data, const DataView& val_data,
                   const TrainConfig& config) {
    config.validate();
    if (train_data.size() == 0) throw ValidationError("training set is empty");
    if (val_data.size() == 0) throw ValidationError("validation set is empty");
    train_data.store->validate();
    val_data.store->validate();
    if (config.augment && train_data.store->molecules.empty()) {
        throw ValidationError("augmentation is on but the store has no molecules");
    }

    const std::size_t batch_size = config.optimizer.batch_size;
    RmspropState opt_state;
    TrainHistory history;
    EarlyStopMonitor monitor(config.patience);

    // Snapshot of the best parameters seen so far.
    std::map<std::string, Tensor> best_params;
    auto snapshot = [&]() {
        best_params.clear();
        for (const auto& name : model.param_names()) best_params[name] = model.param(name);
    };

    std::vector<std::size_t> order(train_data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.optimizer.max_epochs; ++epoch) {
        Rng shuffle_rng = epoch_rng(config.seed, kShuffleTag, epoch);
        Rng dropout_rng = epoch_rng(config.seed, kDropoutTag, epoch);
        Rng augment_rng = epoch_rng(config.seed, kAugmentTag, epoch);

        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t n = std::min(batch_size, order.size() - start);
            const std::span<const std::size_t> positions(order.data() + start, n);
            const BatchInputs inputs = make_batch(model, train_data, positions,
                                                  config.augment ? &augment_rng : nullptr);
            const ForwardPass fp = forward(model, inputs.tensors, /*training=*/true,
                                           &dropout_rng);
            const Tensor& out = fp.activations[static_cast<std::size_t>(model.output())];
            auto [loss, grad] = batch_loss(out, train_data, positions, config.loss);
            if (!std::isfinite(loss)) {
                throw TrainingDiverged("training loss became non-finite at epoch " +
                                           std::to_string(epoch),
                                       history);
            }
            epoch_loss += loss * static_cast<double>(n);
            const auto grads = backward(model, fp, grad);
            rmsprop_step(model, grads, opt_state, config.optimizer);
        }
        epoch_loss /= static_cast<double>(order.size());

        const auto [val_loss, val_er] = validate_pass(model, val_data, config.loss);
        if (!std::isfinite(val_loss)) {
            throw TrainingDiverged("validation loss became non-finite at epoch " +
                                       std::to_string(epoch),
                                   history);
        }
        history.epochs.push_back({epoch_loss, val_loss, val_er});

        const bool stop = monitor.observe(epoch, val_loss);
        if (monitor.improved_last()) snapshot();
        if (stop) {
            history.stop_reason = "early";
            break;
        }
    }
    if (history.stop_reason.empty()) history.stop_reason = "max_epochs";
    history.best_epoch = monitor.best_epoch();

    // "The last best model was saved as the final model."
    for (auto& [name, value] : best_params) model.param(name) = value;
    return history;
}

std::map<std::string, Tensor> assemble_inputs(const ModelGraph& model, const DataView& view,
                                              std::span<const std::size_t> view_positions) {
    return make_batch(model, view, view_positions, nullptr).tensors;
}

std::vector<double> predict_probabilities(const ModelGraph& model, const DataView& view) {
    constexpr std::size_t kChunk = 256;
    std::vector<double> probs;
    probs.reserve(view.size());
    for (std::size_t start = 0; start < view.size(); start += kChunk) {
        const std::size_t n = std::min(kChunk, view.size() - start);
        std::vector<std::size_t> pos(n);
        for (std::size_t i = 0; i < n; ++i) pos[i] = start + i;
        const auto inputs = assemble_inputs(model, view, pos);
        const ForwardPass fp = forward(model, inputs, /*training=*/false);
        const Tensor& out = fp.activations[static_cast<std::size_t>(model.output())];
        for (std::size_t i = 0; i < n; ++i) probs.push_back(out[i]);
    }
    return probs;
}

}  // namespace bfuse
