#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bfuse/checkpoint.hpp"
#include "bfuse/dataset.hpp"
#include "bfuse/descriptors.hpp"
#include "bfuse/graph.hpp"
#include "bfuse/models.hpp"

namespace bfuse {

// Descriptor preprocessing learned at training time. The imputation stats'
// feature names double as the list of raw CSV columns the model consumes.
struct Preproc {
    ImputeStats impute;
    StandardizeStats standard;

    bool uses_descriptors() const { return !impute.feature_names.empty(); }
};

// A trained model of any family, together with everything needed to score
// new data: graphs, raster geometry, and descriptor preprocessing. The
// architecture descriptor embedded in checkpoints rebuilds all of it.
struct Predictor {
    std::string family;  // "cnn" | "mlp" | "parallel" | "sequential"
    CnnSpec cnn_spec;
    MlpSpec mlp_spec;
    std::array<std::size_t, 3> image_shape = {80, 80, 4};
    RasterSpec raster;
    Preproc preproc;

    ModelGraph graph;              // trained graph (for sequential: the MLP)
    std::optional<ModelGraph> cnn;  // sequential only; fully frozen

    // Probabilities for samples given raw inputs. `ids` fixes the output
    // order; images/descriptors may each be null when the family does not
    // need that modality.
    std::vector<double> score(const std::vector<std::string>& ids, const ImageDataset* images,
                              const DescriptorTable* raw_descriptors) const;

    bool needs_images() const { return family != "mlp"; }
    bool needs_descriptors() const { return family != "cnn"; }
};

std::string predictor_arch_json(const Predictor& p);
Checkpoint predictor_to_checkpoint(const Predictor& p);
Predictor predictor_from_checkpoint(const Checkpoint& ckpt);

void save_predictor(const std::string& path, const Predictor& p);
Predictor load_predictor(const std::string& path);

// Mean-probability ensemble over same-family members.
struct EnsemblePredictor {
    std::vector<Predictor> members;

    // Arithmetic mean of member probabilities per sample; a member failing
    // to score raises an error naming that member.
    std::vector<double> score(const std::vector<std::string>& ids, const ImageDataset* images,
                              const DescriptorTable* raw_descriptors) const;
};

}  // namespace bfuse
