#include "cytoclass/classifier.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/rng.hpp"

#include <algorithm>

namespace cyto {

std::string to_string(FreezePolicy policy) {
    switch (policy) {
    case FreezePolicy::freeze_backbone: return "freeze_backbone";
    case FreezePolicy::unfreeze_all: return "unfreeze_all";
    case FreezePolicy::unfreeze_top_n: return "unfreeze_top_n";
    }
    return "freeze_backbone";
}

FreezePolicy freeze_policy_from_string(const std::string& s) {
    if (s == "freeze_backbone") return FreezePolicy::freeze_backbone;
    if (s == "unfreeze_all") return FreezePolicy::unfreeze_all;
    if (s == "unfreeze_top_n") return FreezePolicy::unfreeze_top_n;
    throw ConfigError("unknown freeze policy: " + s);
}

void ModelConfig::validate() const {
    if (input_size <= 0) throw ConfigError("model input_size must be positive");
    if (num_classes < 2) throw ConfigError("model num_classes must be at least 2");
    if (head_dense_units <= 0) throw ConfigError("model head_dense_units must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("model dropout_rate must be in [0, 1)");
    if (freeze_policy == FreezePolicy::unfreeze_top_n && unfreeze_top_n < 0)
        throw ConfigError("unfreeze_top_n must be non-negative");
}

int ProbabilityMatrix::argmax(int r) const {
    const float* row = &data[static_cast<std::size_t>(r) * cols];
    return static_cast<int>(std::max_element(row, row + cols) - row);
}

ClassifierModel::ClassifierModel(const ModelConfig& config, BackboneDef backbone,
                                 std::uint64_t seed, bool backbone_is_standin)
    : config_(config), backbone_name_(backbone.name), standin_(backbone_is_standin),
      backbone_arch_(backbone.arch) {
    config_.validate();

    Rng init_rng(derive_seed(seed, 1));

    // Backbone layers.
    for (const auto& spec : backbone_arch_) {
        auto layer = make_layer(spec, 0);
        layer->init(init_rng);
        net_.add(std::move(layer));
    }
    backbone_layer_count_ = static_cast<int>(net_.layers().size());

    if (backbone.has_weights()) {
        auto params = net_.parameters(false);
        if (params.size() != backbone.weights.size())
            throw DataError("backbone weight tensor count mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i]->size() != backbone.weights[i].size())
                throw DataError("backbone weight tensor " + std::to_string(i) + " has size " +
                                std::to_string(backbone.weights[i].size()) + ", expected " +
                                std::to_string(params[i]->size()));
            params[i]->values = backbone.weights[i];
        }
    }

    // Head: average pooling, flatten, dense+ReLU, dropout, dense, softmax.
    for (const auto& spec : head_arch()) {
        auto layer = make_layer(spec, derive_seed(seed, 2));
        layer->init(init_rng);
        net_.add(std::move(layer));
    }

    apply_freeze_policy();
}

std::vector<LayerSpec> ClassifierModel::head_arch() const {
    const int feat = backbone_output_channels(backbone_arch_);
    return {
        {"global_avg_pool", {}},
        {"flatten", {}},
        {"dense", {{"in", static_cast<double>(feat)}, {"out", static_cast<double>(config_.head_dense_units)}}},
        {"relu", {}},
        {"dropout", {{"rate", config_.dropout_rate}}},
        {"dense", {{"in", static_cast<double>(config_.head_dense_units)},
                   {"out", static_cast<double>(config_.num_classes)}}},
        {"softmax", {}},
    };
}

void ClassifierModel::apply_freeze_policy() {
    auto layers = net_.layers();
    for (int i = 0; i < backbone_layer_count_; ++i) layers[i]->set_trainable(true);

    switch (config_.freeze_policy) {
    case FreezePolicy::unfreeze_all:
        break;
    case FreezePolicy::freeze_backbone:
        for (int i = 0; i < backbone_layer_count_; ++i) layers[i]->set_trainable(false);
        break;
    case FreezePolicy::unfreeze_top_n: {
        // Counted over parameterized backbone layers, topmost first.
        int budget = config_.unfreeze_top_n;
        for (int i = backbone_layer_count_ - 1; i >= 0; --i) {
            if (layers[i]->params().empty()) continue;
            if (budget > 0)
                --budget;
            else
                layers[i]->set_trainable(false);
        }
        break;
    }
    }
}

void ClassifierModel::check_input(const Tensor& pixels) const {
    if (pixels.h() != config_.input_size || pixels.w() != config_.input_size || pixels.c() != 3)
        throw ConfigError("input batch is " + std::to_string(pixels.h()) + "x" +
                          std::to_string(pixels.w()) + "x" + std::to_string(pixels.c()) +
                          ", model expects " + std::to_string(config_.input_size) + "x" +
                          std::to_string(config_.input_size) + "x3");
}

ProbabilityMatrix ClassifierModel::predict(const Tensor& pixels) {
    check_input(pixels);
    Tensor out = net_.forward(pixels, /*training=*/false);
    ProbabilityMatrix probs(out.n(), out.c());
    probs.data = out.data;
    return probs;
}

ProbabilityMatrix ClassifierModel::predict(const ImageBatch& batch) {
    return predict(batch.pixels);
}

Tensor ClassifierModel::forward_training(const Tensor& pixels) {
    check_input(pixels);
    return net_.forward(pixels, /*training=*/true);
}

void ClassifierModel::backward(const Tensor& probability_grad) {
    net_.backward(probability_grad);
}

std::size_t ClassifierModel::backbone_parameter_count() const {
    std::size_t count = 0;
    auto layers = net_.layers();
    for (int i = 0; i < backbone_layer_count_; ++i)
        for (ParamTensor* p : layers[i]->params()) count += p->size();
    return count;
}

std::size_t ClassifierModel::head_parameter_count() const {
    return total_parameter_count() - backbone_parameter_count();
}

ClassifierModel build_classifier(const ModelConfig& config, const WeightSource& weights,
                                 std::uint64_t seed) {
    config.validate();

    BackboneDef def;
    bool standin = false;
    if (weights.path) {
        def = load_backbone_file(*weights.path);
        if (def.name != config.backbone_name)
            throw DataError("backbone file provides '" + def.name + "' but config names '" +
                            config.backbone_name + "'");
    } else if (config.backbone_name == kTinyConvBackbone) {
        def = tiny_conv_def();
    } else if (weights.allow_random_init) {
        // Offline stand-in: the named backbone has no weight file, so a
        // seeded random tiny stack takes its place behind the same interface.
        def = tiny_conv_def();
        def.name = config.backbone_name;
        standin = true;
    } else {
        throw ConfigError("backbone '" + config.backbone_name +
                          "' needs a pretrained weight file (or the random-init fallback flag)");
    }

    return ClassifierModel(config, std::move(def), seed, standin);
}

ProbabilityMatrix predict_batch(ClassifierModel& model, const ImageBatch& batch) {
    if (batch.pixels.n() != static_cast<int>(batch.labels.size()))
        throw ConfigError("batch pixels and labels disagree on sample count");
    return model.predict(batch);
}

InferenceOutput run_inference(ClassifierModel& model, const DatasetIndex& index,
                              int batch_size) {
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    if (index.empty()) throw ConfigError("cannot run inference on an empty index");

    InferenceOutput out;
    out.probabilities = ProbabilityMatrix(static_cast<int>(index.size()),
                                          model.config().num_classes);
    out.labels.reserve(index.size());

    const auto& samples = index.samples();
    for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
        std::vector<SampleRecord> slice(samples.begin() + static_cast<std::ptrdiff_t>(start),
                                        samples.begin() + static_cast<std::ptrdiff_t>(end));
        ImageBatch batch = load_batch(slice, model.config().input_size);
        ProbabilityMatrix probs = model.predict(batch);
        for (int r = 0; r < probs.rows; ++r)
            for (int c = 0; c < probs.cols; ++c)
                out.probabilities.at(static_cast<int>(start) + r, c) = probs.at(r, c);
        out.labels.insert(out.labels.end(), batch.labels.begin(), batch.labels.end());
    }
    return out;
}

} // namespace cyto
