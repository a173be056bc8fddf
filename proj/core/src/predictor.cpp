#include "bfuse/predictor.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "bfuse/errors.hpp"
#include "bfuse/metrics.hpp"
#include "bfuse/rng.hpp"
#include "bfuse/version.hpp"

namespace bfuse {

namespace {

using nlohmann::json;

json raster_to_json(const RasterSpec& r) {
    return {{"width_px", r.width_px},
            {"height_px", r.height_px},
            {"resolution", r.resolution},
            {"channel_scheme", r.channel_scheme}};
}

RasterSpec raster_from_json(const json& j) {
    RasterSpec r;
    r.width_px = j.at("width_px").get<std::size_t>();
    r.height_px = j.at("height_px").get<std::size_t>();
    r.resolution = j.at("resolution").get<double>();
    r.channel_scheme = j.at("channel_scheme").get<std::string>();
    return r;
}

json preproc_to_json(const Preproc& p) {
    return {{"impute",
             {{"feature_names", p.impute.feature_names}, {"medians", p.impute.medians}}},
            {"standardize",
             {{"feature_names", p.standard.feature_names},
              {"mean", p.standard.mean},
              {"stddev", p.standard.stddev},
              {"dropped", p.standard.dropped}}}};
}

Preproc preproc_from_json(const json& j) {
    Preproc p;
    const json& imp = j.at("impute");
    p.impute.feature_names = imp.at("feature_names").get<std::vector<std::string>>();
    p.impute.medians = imp.at("medians").get<std::vector<double>>();
    const json& std_ = j.at("standardize");
    p.standard.feature_names = std_.at("feature_names").get<std::vector<std::string>>();
    p.standard.mean = std_.at("mean").get<std::vector<double>>();
    p.standard.stddev = std_.at("stddev").get<std::vector<double>>();
    p.standard.dropped = std_.at("dropped").get<std::vector<std::string>>();
    return p;
}

void check_image_compat(const Predictor& p, const ImageDataset& ds) {
    if (ds.spec.width_px != p.raster.width_px || ds.spec.height_px != p.raster.height_px) {
        throw ValidationError("image archive grid does not match the model's raster spec");
    }
    if (ds.spec.resolution != p.raster.resolution) {
        throw ValidationError("image archive resolution does not match the model");
    }
    if (ds.spec.channel_scheme != p.raster.channel_scheme) {
        throw ValidationError("image archive channel scheme '" + ds.spec.channel_scheme +
                              "' does not match the model's '" + p.raster.channel_scheme + "'");
    }
}

std::vector<std::size_t> image_rows_for_ids(const ImageDataset& ds,
                                            const std::vector<std::string>& ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ds.size(); ++i) index[ds.ids[i]] = i;
    if (index.size() != ds.size()) throw ValidationError("image archive has duplicate ids");
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end()) throw ValidationError("no image for sample id: " + id);
        rows.push_back(it->second);
    }
    return rows;
}

// Forward probabilities for one graph over pre-assembled modality data.
std::vector<double> graph_probabilities(const ModelGraph& g, const ImageDataset* images,
                                        const std::vector<std::size_t>* image_rows,
                                        const Tensor* features, std::size_t n) {
    constexpr std::size_t kChunk = 256;
    std::vector<double> probs;
    probs.reserve(n);
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t take = std::min(kChunk, n - start);
        std::map<std::string, Tensor> inputs;
        for (int id : g.input_ids()) {
            const Node& node = g.node(id);
            if (node.name == "image") {
                std::vector<std::size_t> rows(take);
                for (std::size_t i = 0; i < take; ++i) rows[i] = (*image_rows)[start + i];
                inputs.emplace("image", image_batch(*images, rows));
            } else if (node.name == "features") {
                const std::size_t f = features->dim(1);
                Tensor batch({take, f});
                for (std::size_t i = 0; i < take; ++i) {
                    std::copy_n(features->data() + (start + i) * f, f, batch.data() + i * f);
                }
                inputs.emplace("features", std::move(batch));
            } else {
                throw StructuralError("graph input '" + node.name + "' has no data source");
            }
        }
        const ForwardPass fp = forward(g, inputs, /*training=*/false);
        const Tensor& out = fp.activations[static_cast<std::size_t>(g.output())];
        for (std::size_t i = 0; i < take; ++i) probs.push_back(out[i]);
    }
    return probs;
}

}  // namespace

std::vector<double> Predictor::score(const std::vector<std::string>& ids,
                                     const ImageDataset* images,
                                     const DescriptorTable* raw_descriptors) const {
    if (ids.empty()) throw ValidationError("no sample ids to score");
    if (needs_images()) {
        if (images == nullptr) {
            throw ValidationError("family '" + family + "' needs an image archive");
        }
        check_image_compat(*this, *images);
    }
    if (needs_descriptors() && raw_descriptors == nullptr) {
        throw ValidationError("family '" + family + "' needs a descriptor table");
    }

    std::vector<std::size_t> image_rows;
    if (needs_images()) image_rows = image_rows_for_ids(*images, ids);

    std::optional<Tensor> feature_matrix;
    if (needs_descriptors()) {
        DescriptorTable cols = select_features(*raw_descriptors, preproc.impute.feature_names);
        DescriptorTable aligned = align_to_ids(cols, ids);
        DescriptorTable imputed = impute_with(aligned, preproc.impute);
        if (family == "sequential") {
            // Frozen-CNN features join the descriptor columns before the
            // shared standardization.
            ImageDataset ordered;
            ordered.spec = images->spec;
            for (std::size_t row : image_rows) {
                ordered.ids.push_back(images->ids[row]);
                ordered.labels.push_back(images->labels[row]);
                ordered.source_tags.push_back(images->source_tags[row]);
                ordered.collision_counts.push_back(images->collision_counts[row]);
                ordered.pixels.push_back(images->pixels[row]);
            }
            const DescriptorTable cnn_features = cnn_feature_table(*cnn, ordered);
            const DescriptorTable augmented = hconcat(imputed, cnn_features);
            feature_matrix = standardize_with(augmented, preproc.standard).as_tensor();
        } else {
            feature_matrix = standardize_with(imputed, preproc.standard).as_tensor();
        }
    }

    const ModelGraph& scoring_graph = graph;
    return graph_probabilities(scoring_graph, needs_images() && family != "sequential"
                                                  ? images
                                                  : nullptr,
                               &image_rows, feature_matrix ? &*feature_matrix : nullptr,
                               ids.size());
}

std::string predictor_arch_json(const Predictor& p) {
    json j;
    j["engine"] = "bfuse";
    j["engine_version"] = kEngineVersion;
    j["family"] = p.family;
    j["image_shape"] = p.image_shape;
    j["raster"] = raster_to_json(p.raster);
    j["cnn_spec"] = {{"filters", p.cnn_spec.filters},
                     {"blocks", p.cnn_spec.blocks},
                     {"stem_kernel", p.cnn_spec.stem_kernel},
                     {"stem_stride", p.cnn_spec.stem_stride}};
    j["mlp_spec"] = {{"depth", p.mlp_spec.depth},
                     {"width", p.mlp_spec.width},
                     {"dropout", p.mlp_spec.dropout_rate}};
    j["preproc"] = preproc_to_json(p.preproc);
    if (p.family == "sequential") {
        std::vector<std::string> frozen;
        if (p.cnn) {
            for (const auto& name : p.cnn->param_names()) frozen.push_back("cnn." + name);
        }
        j["frozen"] = frozen;
    }
    return j.dump(2);
}

Checkpoint predictor_to_checkpoint(const Predictor& p) {
    Checkpoint ckpt;
    ckpt.arch_json = predictor_arch_json(p);
    if (p.family == "sequential") {
        if (!p.cnn) throw StructuralError("sequential predictor lost its CNN");
        for (const auto& name : p.cnn->param_names()) {
            ckpt.params.push_back({"cnn." + name, p.cnn->param(name)});
        }
        for (const auto& name : p.graph.param_names()) {
            ckpt.params.push_back({"mlp." + name, p.graph.param(name)});
        }
    } else {
        for (const auto& name : p.graph.param_names()) {
            ckpt.params.push_back({name, p.graph.param(name)});
        }
    }
    return ckpt;
}

Predictor predictor_from_checkpoint(const Checkpoint& ckpt) {
    json j;
    try {
        j = json::parse(ckpt.arch_json);
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint architecture descriptor is not valid JSON: ") +
                      e.what());
    }
    Predictor p;
    p.family = j.at("family").get<std::string>();
    p.image_shape = j.at("image_shape").get<std::array<std::size_t, 3>>();
    p.raster = raster_from_json(j.at("raster"));
    const json& cs = j.at("cnn_spec");
    p.cnn_spec = CnnSpec{cs.at("filters").get<std::size_t>(), cs.at("blocks").get<std::size_t>(),
                         cs.at("stem_kernel").get<std::size_t>(),
                         cs.at("stem_stride").get<std::size_t>()};
    const json& ms = j.at("mlp_spec");
    p.mlp_spec = MlpSpec{ms.at("depth").get<std::size_t>(), ms.at("width").get<std::size_t>(),
                         ms.at("dropout").get<double>()};
    p.preproc = preproc_from_json(j.at("preproc"));

    Rng rng(0);  // placeholder init; every parameter is overwritten below
    const std::size_t n_features = p.preproc.standard.feature_names.size();
    if (p.family == "cnn") {
        p.graph = build_cnn(p.cnn_spec, p.image_shape, rng);
        load_params_into(p.graph, ckpt);
    } else if (p.family == "mlp") {
        p.graph = build_mlp(p.mlp_spec, n_features, rng);
        load_params_into(p.graph, ckpt);
    } else if (p.family == "parallel") {
        ModelGraph cnn0 = build_cnn(p.cnn_spec, p.image_shape, rng);
        ModelGraph mlp0 = build_mlp(p.mlp_spec, n_features, rng);
        p.graph = fuse_parallel(cnn0, mlp0, rng);
        load_params_into(p.graph, ckpt);
    } else if (p.family == "sequential") {
        p.cnn = build_cnn(p.cnn_spec, p.image_shape, rng);
        p.graph = build_mlp(p.mlp_spec, n_features, rng);
        std::size_t cnn_loaded = 0, mlp_loaded = 0;
        for (const auto& rec : ckpt.params) {
            if (rec.name.rfind("cnn.", 0) == 0) {
                const std::string name = rec.name.substr(4);
                if (!p.cnn->has_param(name)) {
                    throw StructuralError("checkpoint CNN parameter unknown: " + rec.name);
                }
                p.cnn->param(name) = rec.value;
                ++cnn_loaded;
            } else if (rec.name.rfind("mlp.", 0) == 0) {
                const std::string name = rec.name.substr(4);
                if (!p.graph.has_param(name)) {
                    throw StructuralError("checkpoint MLP parameter unknown: " + rec.name);
                }
                p.graph.param(name) = rec.value;
                ++mlp_loaded;
            } else {
                throw StructuralError("sequential checkpoint parameter lacks a branch prefix: " +
                                      rec.name);
            }
        }
        if (cnn_loaded != p.cnn->param_names().size() ||
            mlp_loaded != p.graph.param_names().size()) {
            throw StructuralError("sequential checkpoint is missing parameters");
        }
        p.cnn->set_all_trainable(false);
    } else {
        throw ValidationError("unknown model family in checkpoint: " + p.family);
    }
    return p;
}

void save_predictor(const std::string& path, const Predictor& p) {
    save_checkpoint(path, predictor_to_checkpoint(p));
}

Predictor load_predictor(const std::string& path) {
    return predictor_from_checkpoint(load_checkpoint(path));
}

std::vector<double> EnsemblePredictor::score(const std::vector<std::string>& ids,
                                             const ImageDataset* images,
                                             const DescriptorTable* raw_descriptors) const {
    if (members.empty()) throw ValidationError("ensemble has no members");
    std::vector<std::vector<double>> member_probs;
    member_probs.reserve(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
        try {
            member_probs.push_back(members[m].score(ids, images, raw_descriptors));
        } catch (const Error& e) {
            throw ValidationError("ensemble member " + std::to_string(m) +
                                  " failed to score: " + e.what());
        }
    }
    std::vector<double> out(ids.size());
    std::vector<double> column(members.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t m = 0; m < members.size(); ++m) column[m] = member_probs[m][i];
        out[i] = ensemble_mean(column);
    }
    return out;
}

}  // namespace bfuse
