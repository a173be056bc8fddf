#include "bfuse/pipeline.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "bfuse/errors.hpp"
#include "bfuse/rng.hpp"
#include "bfuse/version.hpp"

namespace bfuse {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;

std::vector<std::size_t> positions_of(const std::vector<std::string>& master,
                                      std::span<const std::string> ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < master.size(); ++i) index[master[i]] = i;
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end()) throw ValidationError("unknown sample id in split: " + id);
        rows.push_back(it->second);
    }
    return rows;
}

std::string trunk_arch_json(const CnnSpec& spec, const std::array<std::size_t, 3>& shape,
                            const RasterSpec& raster) {
    nlohmann::json j;
    j["engine"] = "bfuse";
    j["engine_version"] = kEngineVersion;
    j["family"] = "cnn-trunk";
    j["image_shape"] = shape;
    j["raster"] = {{"width_px", raster.width_px},
                   {"height_px", raster.height_px},
                   {"resolution", raster.resolution},
                   {"channel_scheme", raster.channel_scheme}};
    j["cnn_spec"] = {{"filters", spec.filters},
                     {"blocks", spec.blocks},
                     {"stem_kernel", spec.stem_kernel},
                     {"stem_stride", spec.stem_stride}};
    return j.dump(2);
}

struct DescriptorPrep {
    DescriptorTable imputed;  // aligned with master ids, no missing values
    ImputeStats impute;
};

DescriptorPrep prepare_descriptors(const PipelineData& data,
                                   const std::vector<std::string>& master_ids,
                                   std::span<const std::string> feature_selection,
                                   std::span<const std::size_t> train_rows) {
    if (!data.descriptors) {
        throw ValidationError("this model family needs a descriptor table");
    }
    DescriptorTable cols = feature_selection.empty()
                               ? *data.descriptors
                               : select_features(*data.descriptors, feature_selection);
    DescriptorTable aligned = align_to_ids(cols, master_ids);
    const DescriptorTable train_slice = subset_rows(aligned, train_rows);
    auto [train_imputed, impute_stats] = impute_missing(train_slice);
    (void)train_imputed;
    DescriptorPrep prep{impute_with(aligned, impute_stats), std::move(impute_stats)};
    return prep;
}

}  // namespace

std::vector<std::string> PipelineData::master_ids() const {
    if (images) return images->ids;
    if (descriptors) return descriptors->sample_ids();
    throw ValidationError("no input data: neither images nor descriptors present");
}

std::vector<int> PipelineData::resolve_labels() const {
    const std::vector<std::string> ids = master_ids();
    std::vector<int> out(ids.size(), -1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = labels.find(ids[i]);
        if (it != labels.end()) {
            out[i] = it->second;
        } else if (images) {
            out[i] = images->labels[i];
        }
    }
    return out;
}

std::vector<int> labels_for_ids(const PipelineData& data, std::span<const std::string> ids) {
    const std::vector<std::string> master = data.master_ids();
    const std::vector<int> all = data.resolve_labels();
    const std::vector<std::size_t> rows = positions_of(master, ids);
    std::vector<int> out;
    out.reserve(ids.size());
    for (std::size_t r : rows) out.push_back(all[r]);
    return out;
}

TrainedModel train_family(const FamilyTrainRequest& req, const PipelineData& data,
                          std::span<const std::string> train_ids,
                          std::span<const std::string> val_ids) {
    static const std::set<std::string> kFamilies = {"cnn", "mlp", "parallel", "sequential"};
    if (!kFamilies.count(req.family)) {
        throw ValidationError("unknown model family: " + req.family);
    }
    req.train.validate();
    const bool needs_images = req.family != "mlp";
    const bool needs_descriptors = req.family != "cnn";
    if (needs_images && !data.images) {
        throw ValidationError("family '" + req.family + "' needs an image archive");
    }
    if (req.family == "sequential" && !req.cnn_checkpoint) {
        throw ValidationError("sequential fusion needs a cnn checkpoint");
    }

    const std::vector<std::string> master = data.master_ids();
    const std::vector<std::size_t> train_rows = positions_of(master, train_ids);
    const std::vector<std::size_t> val_rows = positions_of(master, val_ids);

    SampleStore store;
    store.ids = master;
    store.labels = data.resolve_labels();
    if (needs_images) {
        store.images = *data.images;
        if (req.train.augment) store.molecules = data.molecules;
    }

    Rng init_rng(Rng::mix(req.train.seed, kInitTag));
    Predictor predictor;
    predictor.family = req.family;
    predictor.cnn_spec = req.cnn_spec;
    predictor.mlp_spec = req.mlp_spec;
    if (needs_images) {
        predictor.raster = data.images->spec;
        predictor.image_shape = {data.images->spec.height_px, data.images->spec.width_px,
                                 RasterSpec::kChannels};
    }

    if (req.family == "cnn") {
        predictor.graph = build_cnn(req.cnn_spec, predictor.image_shape, init_rng);
        if (req.init_trunk) {
            load_params_into(predictor.graph, *req.init_trunk, /*allow_missing=*/true);
            if (req.finetune_head_only) {
                const std::set<std::string> head = {"classifier.W", "classifier.b"};
                for (const auto& name : predictor.graph.param_names()) {
                    if (!head.count(name)) predictor.graph.set_trainable(name, false);
                }
            }
        }
    } else {
        DescriptorPrep prep =
            prepare_descriptors(data, master, req.feature_selection, train_rows);
        predictor.preproc.impute = prep.impute;

        if (req.family == "sequential") {
            ModelGraph cnn = load_cnn_for_features(*req.cnn_checkpoint);
            SequentialFusion fusion = fuse_sequential(cnn, *data.images, prep.imputed,
                                                      req.mlp_spec, train_rows, init_rng);
            predictor.cnn = std::move(fusion.cnn);
            predictor.preproc.standard = fusion.stats;
            predictor.graph = std::move(fusion.mlp);
            store.features = fusion.augmented.as_tensor();
            // The trained graph sees features only; images were consumed by
            // the frozen feature extractor above.
            store.images.reset();
            store.molecules.clear();
        } else {
            const DescriptorTable train_slice = subset_rows(prep.imputed, train_rows);
            auto [train_std, std_stats] = standardize(train_slice);
            (void)train_std;
            predictor.preproc.standard = std_stats;
            const DescriptorTable all_std = standardize_with(prep.imputed, std_stats);
            store.features = all_std.as_tensor();
            if (req.family == "mlp") {
                predictor.graph = build_mlp(req.mlp_spec, all_std.n_features(), init_rng);
            } else {
                ModelGraph cnn0 = build_cnn(req.cnn_spec, predictor.image_shape, init_rng);
                ModelGraph mlp0 = build_mlp(req.mlp_spec, all_std.n_features(), init_rng);
                predictor.graph = fuse_parallel(cnn0, mlp0, init_rng);
            }
        }
    }
    (void)needs_descriptors;

    store.validate();
    const DataView train_view = DataView::of(store, train_rows);
    const DataView val_view = DataView::of(store, val_rows);

    TrainedModel out;
    out.history = train(predictor.graph, train_view, val_view, req.train);
    out.predictor = std::move(predictor);
    return out;
}

PretrainResult pretrain_cnn(const PretrainRequest& req, const PipelineData& data,
                            std::span<const std::string> train_ids,
                            std::span<const std::string> val_ids) {
    if (!data.images) throw ValidationError("weak pretraining needs an image archive");
    if (req.target_features.empty()) {
        throw ValidationError("weak pretraining needs at least one target feature column");
    }
    const std::vector<std::string> master = data.master_ids();
    const std::vector<std::size_t> train_rows = positions_of(master, train_ids);
    const std::vector<std::size_t> val_rows = positions_of(master, val_ids);

    DescriptorPrep prep = prepare_descriptors(data, master, req.target_features, train_rows);
    const DescriptorTable train_slice = subset_rows(prep.imputed, train_rows);
    auto [train_std, std_stats] = standardize(train_slice);
    (void)train_std;
    const DescriptorTable targets_std = standardize_with(prep.imputed, std_stats);

    SampleStore store;
    store.ids = master;
    store.images = *data.images;
    store.targets = targets_std.as_tensor();
    store.validate();

    Rng init_rng(Rng::mix(req.train.seed, kInitTag));
    const std::array<std::size_t, 3> shape = {data.images->spec.height_px,
                                              data.images->spec.width_px,
                                              RasterSpec::kChannels};
    const ModelGraph cnn = build_cnn(req.cnn_spec, shape, init_rng);

    return pretrain_weak(cnn, DataView::of(store, train_rows), DataView::of(store, val_rows),
                         req.train, trunk_arch_json(req.cnn_spec, shape, data.images->spec));
}

ModelGraph load_cnn_for_features(const Checkpoint& ckpt) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ckpt.arch_json);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint architecture descriptor is not valid JSON: ") +
                      e.what());
    }
    const std::string family = j.at("family").get<std::string>();
    if (family == "cnn") {
        Predictor p = predictor_from_checkpoint(ckpt);
        return std::move(p.graph);
    }
    if (family == "cnn-trunk") {
        const auto shape = j.at("image_shape").get<std::array<std::size_t, 3>>();
        const auto& cs = j.at("cnn_spec");
        const CnnSpec spec{cs.at("filters").get<std::size_t>(),
                           cs.at("blocks").get<std::size_t>(),
                           cs.at("stem_kernel").get<std::size_t>(),
                           cs.at("stem_stride").get<std::size_t>()};
        Rng rng(0);
        ModelGraph g = build_cnn(spec, shape, rng);
        load_params_into(g, ckpt, /*allow_missing=*/true);
        return g;
    }
    throw ValidationError("checkpoint family '" + family +
                          "' cannot serve as a feature extractor");
}

}  // namespace bfuse
