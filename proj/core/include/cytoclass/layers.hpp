#pragma once

#include "cytoclass/rng.hpp"
#include "cytoclass/tensor.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace cyto {

/// Weights plus the gradient accumulated by the latest backward pass.
struct ParamTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
    std::vector<float> grads;

    std::size_t size() const { return values.size(); }
};

/// Serializable layer description (kind + integer/real attributes).
/// Checkpoints store these alongside the weight payload.
struct LayerSpec {
    std::string kind;
    std::map<std::string, double> attrs;

    bool operator==(const LayerSpec&) const = default;
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerSpec spec() const = 0;
    virtual Tensor forward(const Tensor& x, bool training) = 0;
    /// Gradient w.r.t. the layer input; also accumulates parameter grads.
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void init(Rng& rng) {}
    virtual std::vector<ParamTensor*> params() { return {}; }

    bool trainable() const { return trainable_; }
    void set_trainable(bool value) { trainable_ = value; }

private:
    bool trainable_ = true;
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, std::uint64_t dropout_seed);

/// 3x3-style convolution, stride 1, explicit zero padding.
class Conv2d : public Layer {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int pad);

    LayerSpec spec() const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;
    void init(Rng& rng) override;
    std::vector<ParamTensor*> params() override { return {&weight_, &bias_}; }

private:
    int in_c_, out_c_, k_, pad_;
    ParamTensor weight_; // (k, k, in, out)
    ParamTensor bias_;   // (out)
    Tensor input_;
};

class Relu : public Layer {
public:
    LayerSpec spec() const override { return {"relu", {}}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor input_;
};

/// 2x2 average pooling, stride 2; trailing odd rows/columns are dropped.
class AvgPool2 : public Layer {
public:
    LayerSpec spec() const override { return {"avgpool2", {}}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::array<int, 4> in_shape_{};
};

class GlobalAvgPool : public Layer {
public:
    LayerSpec spec() const override { return {"global_avg_pool", {}}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::array<int, 4> in_shape_{};
};

class Flatten : public Layer {
public:
    LayerSpec spec() const override { return {"flatten", {}}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::array<int, 4> in_shape_{};
};

class Dense : public Layer {
public:
    Dense(int in_features, int out_features);

    LayerSpec spec() const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;
    void init(Rng& rng) override;
    std::vector<ParamTensor*> params() override { return {&weight_, &bias_}; }

private:
    int in_f_, out_f_;
    ParamTensor weight_; // (in, out)
    ParamTensor bias_;   // (out)
    Tensor input_;
};

/// Inverted dropout; active only in training mode, identity at inference.
class Dropout : public Layer {
public:
    Dropout(double rate, std::uint64_t seed);

    LayerSpec spec() const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    double rate_;
    Rng rng_;
    std::vector<float> mask_;
};

class Softmax : public Layer {
public:
    LayerSpec spec() const override { return {"softmax", {}}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor output_;
};

/// Ordered layer stack with shared forward/backward plumbing.
class Sequential {
public:
    Sequential() = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(const Tensor& x, bool training);
    /// Backpropagates only as deep as the lowest trainable layer.
    void backward(const Tensor& dy);

    std::vector<Layer*> layers() const;
    std::vector<ParamTensor*> parameters(bool trainable_only) const;
    std::size_t parameter_count(bool trainable_only) const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

class AdamOptimizer {
public:
    AdamOptimizer(std::vector<ParamTensor*> params, const AdamConfig& config);

    /// One update from the gradients currently stored on the parameters.
    void step();

private:
    std::vector<ParamTensor*> params_;
    AdamConfig config_;
    std::vector<std::vector<float>> m_, v_;
    long step_count_ = 0;
};

} // namespace cyto
