#include "bfuse/pretrain.hpp"

#include <cmath>
#include <set>

#include "bfuse/errors.hpp"
#include "bfuse/rng.hpp"

namespace bfuse {

namespace {

// Targets must be z-scored on the training rows: mean ~ 0, stddev ~ 1.
void check_targets_standardized(const DataView& view) {
    if (!view.store->targets) {
        throw ValidationError("weak pretraining requires regression targets");
    }
    const Tensor& t = *view.store->targets;
    const std::size_t cols = t.dim(1);
    const double n = static_cast<double>(view.size());
    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (std::size_t r : view.rows) mean += t.at2(r, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t r : view.rows) {
            const double d = t.at2(r, j) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (std::abs(mean) > 1e-6 || std::abs(sd - 1.0) > 1e-3) {
            throw ValidationError("pretraining target column " + std::to_string(j) +
                                  " is not standardized (mean " + std::to_string(mean) +
                                  ", stddev " + std::to_string(sd) + ")");
        }
    }
}

}  // namespace

PretrainResult pretrain_weak(const ModelGraph& cnn, const DataView& train_data,
                             const DataView& val_data, const TrainConfig& config,
                             std::string arch_json) {
    if (cnn.penultimate() < 0) {
        throw StructuralError("weak pretraining needs a CNN with a tagged penultimate node");
    }
    check_targets_standardized(train_data);
    check_targets_standardized(val_data);
    const std::size_t n_targets = train_data.store->targets->dim(1);

    // Copy the trunk verbatim (no prefix) so parameter names keep matching
    // the classifier graph, then attach a fresh linear regression head.
    ModelGraph reg;
    const Node& image_input = cnn.node(cnn.input_ids().at(0));
    const int image = reg.add_input(image_input.name, image_input.output_shape);
    const auto mapping =
        reg.absorb_subgraph(cnn, cnn.penultimate(), "", {{cnn.input_ids().at(0), image}});
    const int pen = mapping[static_cast<std::size_t>(cnn.penultimate())];
    reg.tag_penultimate(pen);
    Rng head_rng(Rng::mix(config.seed, 0x70726574));
    const int head = reg.add_dense("regress_head", pen, n_targets, head_rng,
                                   InitKind::GlorotUniform);
    reg.set_output(head);

    TrainConfig cfg = config;
    cfg.loss = LossKind::MeanSquaredError;
    PretrainResult result;
    result.history = train(reg, train_data, val_data, cfg);

    // Keep the trunk only; the regression head is discarded.
    const std::set<std::string> head_params = {"regress_head.W", "regress_head.b"};
    result.trunk.arch_json = std::move(arch_json);
    for (const auto& name : reg.param_names()) {
        if (head_params.count(name)) continue;
        result.trunk.params.push_back({name, reg.param(name)});
    }
    return result;
}

}  // namespace bfuse
