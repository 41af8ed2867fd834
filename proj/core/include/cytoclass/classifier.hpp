#pragma once

#include "cytoclass/backbone.hpp"
#include "cytoclass/image_io.hpp"
#include "cytoclass/layers.hpp"
#include "cytoclass/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cyto {

enum class FreezePolicy { freeze_backbone, unfreeze_all, unfreeze_top_n };

std::string to_string(FreezePolicy policy);
FreezePolicy freeze_policy_from_string(const std::string& s);

struct ModelConfig {
    std::string backbone_name = "inception-resnet-v2";
    int input_size = 299;
    int num_classes = 21;
    int head_dense_units = 256;
    double dropout_rate = 0.5;
    FreezePolicy freeze_policy = FreezePolicy::freeze_backbone;
    int unfreeze_top_n = 0; // used when freeze_policy == unfreeze_top_n

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

/// Where backbone weights come from. Backbones other than the built-in test
/// stack need a weight file; `allow_random_init` opts into a seeded
/// random-weight stand-in so the pipeline can run fully offline.
struct WeightSource {
    std::optional<std::filesystem::path> path;
    bool allow_random_init = false;
};

/// Row-per-sample class probabilities.
struct ProbabilityMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<float> data;

    ProbabilityMatrix() = default;
    ProbabilityMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

    float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }

    /// Predicted class of one row (argmax; lowest index wins ties).
    int argmax(int r) const;
};

/// Backbone feature extractor plus the classification head
/// (average pooling, flatten, dense+ReLU, dropout, dense, softmax).
class ClassifierModel {
public:
    ClassifierModel(const ModelConfig& config, BackboneDef backbone, std::uint64_t seed,
                    bool backbone_is_standin = false);

    const ModelConfig& config() const { return config_; }
    const std::string& backbone_name() const { return backbone_name_; }
    /// True when the configured backbone had no weight file and a seeded
    /// random stand-in was substituted.
    bool backbone_is_random_standin() const { return standin_; }

    /// Inference: dropout inactive, deterministic.
    ProbabilityMatrix predict(const ImageBatch& batch);
    ProbabilityMatrix predict(const Tensor& pixels);

    /// Training-mode forward (dropout active); pairs with backward().
    Tensor forward_training(const Tensor& pixels);
    /// Backpropagates d(loss)/d(probabilities) through the stack.
    void backward(const Tensor& probability_grad);

    std::vector<ParamTensor*> trainable_parameters() const { return net_.parameters(true); }
    std::vector<ParamTensor*> all_parameters() const { return net_.parameters(false); }
    std::size_t trainable_parameter_count() const { return net_.parameter_count(true); }
    std::size_t total_parameter_count() const { return net_.parameter_count(false); }
    std::size_t backbone_parameter_count() const;
    std::size_t head_parameter_count() const;

    const std::vector<LayerSpec>& backbone_arch() const { return backbone_arch_; }
    std::vector<LayerSpec> head_arch() const;

private:
    void check_input(const Tensor& pixels) const;
    void apply_freeze_policy();

    ModelConfig config_;
    std::string backbone_name_;
    bool standin_ = false;
    std::vector<LayerSpec> backbone_arch_;
    int backbone_layer_count_ = 0;
    Sequential net_;
};

/// Assembles the classifier. `seed` drives random initialization (and the
/// dropout stream); with a weight file in `weights` the backbone starts from
/// the stored parameters instead.
ClassifierModel build_classifier(const ModelConfig& config, const WeightSource& weights,
                                 std::uint64_t seed);

ProbabilityMatrix predict_batch(ClassifierModel& model, const ImageBatch& batch);

struct InferenceOutput {
    ProbabilityMatrix probabilities;
    std::vector<int> labels;
};

/// Batched inference over a whole index, in manifest order.
InferenceOutput run_inference(ClassifierModel& model, const DatasetIndex& index,
                              int batch_size);

} // namespace cyto
