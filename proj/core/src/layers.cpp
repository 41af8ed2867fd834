#include "cytoclass/layers.hpp"

#include "cytoclass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cyto {

namespace {

void zero_grads(ParamTensor& p) {
    std::fill(p.grads.begin(), p.grads.end(), 0.0f);
}

void check_vector_input(const Tensor& x, int features, const char* kind) {
    if (x.h() != 1 || x.w() != 1 || x.c() != features)
        throw ConfigError(std::string(kind) + " layer expects (N,1,1," +
                          std::to_string(features) + ") input, got (" +
                          std::to_string(x.n()) + "," + std::to_string(x.h()) + "," +
                          std::to_string(x.w()) + "," + std::to_string(x.c()) + ")");
}

} // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int pad)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel), pad_(pad) {
    weight_.name = "conv.weight";
    weight_.shape = {k_, k_, in_c_, out_c_};
    weight_.values.assign(static_cast<std::size_t>(k_) * k_ * in_c_ * out_c_, 0.0f);
    weight_.grads = weight_.values;
    bias_.name = "conv.bias";
    bias_.shape = {out_c_};
    bias_.values.assign(static_cast<std::size_t>(out_c_), 0.0f);
    bias_.grads = bias_.values;
}

LayerSpec Conv2d::spec() const {
    return {"conv",
            {{"in", static_cast<double>(in_c_)},
             {"out", static_cast<double>(out_c_)},
             {"kernel", static_cast<double>(k_)},
             {"pad", static_cast<double>(pad_)}}};
}

void Conv2d::init(Rng& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(k_ * k_ * in_c_));
    for (float& w : weight_.values) w = rng.next_float(-limit, limit);
    std::fill(bias_.values.begin(), bias_.values.end(), 0.0f);
}

Tensor Conv2d::forward(const Tensor& x, bool) {
    if (x.c() != in_c_)
        throw ConfigError("conv expects " + std::to_string(in_c_) + " input channels, got " +
                          std::to_string(x.c()));
    input_ = x;
    const int oh = x.h() + 2 * pad_ - k_ + 1;
    const int ow = x.w() + 2 * pad_ - k_ + 1;
    if (oh <= 0 || ow <= 0)
        throw ConfigError("conv input too small for kernel");

    Tensor y(x.n(), oh, ow, out_c_);
    std::vector<float> acc(static_cast<std::size_t>(out_c_));
    for (int n = 0; n < x.n(); ++n) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                std::memcpy(acc.data(), bias_.values.data(), sizeof(float) * out_c_);
                for (int ky = 0; ky < k_; ++ky) {
                    const int iy = oy + ky - pad_;
                    if (iy < 0 || iy >= x.h()) continue;
                    for (int kx = 0; kx < k_; ++kx) {
                        const int ix = ox + kx - pad_;
                        if (ix < 0 || ix >= x.w()) continue;
                        const float* xv = &x.at(n, iy, ix, 0);
                        const float* wv =
                            &weight_.values[((static_cast<std::size_t>(ky) * k_ + kx) * in_c_) * out_c_];
                        for (int ic = 0; ic < in_c_; ++ic) {
                            const float xi = xv[ic];
                            const float* wrow = wv + static_cast<std::size_t>(ic) * out_c_;
                            for (int oc = 0; oc < out_c_; ++oc) acc[oc] += xi * wrow[oc];
                        }
                    }
                }
                std::memcpy(&y.at(n, oy, ox, 0), acc.data(), sizeof(float) * out_c_);
            }
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    zero_grads(weight_);
    zero_grads(bias_);
    const Tensor& x = input_;
    Tensor dx(x.n(), x.h(), x.w(), x.c());

    for (int n = 0; n < dy.n(); ++n) {
        for (int oy = 0; oy < dy.h(); ++oy) {
            for (int ox = 0; ox < dy.w(); ++ox) {
                const float* g = &dy.at(n, oy, ox, 0);
                for (int oc = 0; oc < out_c_; ++oc) bias_.grads[oc] += g[oc];
                for (int ky = 0; ky < k_; ++ky) {
                    const int iy = oy + ky - pad_;
                    if (iy < 0 || iy >= x.h()) continue;
                    for (int kx = 0; kx < k_; ++kx) {
                        const int ix = ox + kx - pad_;
                        if (ix < 0 || ix >= x.w()) continue;
                        const float* xv = &x.at(n, iy, ix, 0);
                        float* dxv = &dx.at(n, iy, ix, 0);
                        const std::size_t wbase =
                            ((static_cast<std::size_t>(ky) * k_ + kx) * in_c_) * out_c_;
                        for (int ic = 0; ic < in_c_; ++ic) {
                            const float xi = xv[ic];
                            const float* wrow = &weight_.values[wbase + static_cast<std::size_t>(ic) * out_c_];
                            float* gwrow = &weight_.grads[wbase + static_cast<std::size_t>(ic) * out_c_];
                            float dsum = 0.0f;
                            for (int oc = 0; oc < out_c_; ++oc) {
                                gwrow[oc] += xi * g[oc];
                                dsum += wrow[oc] * g[oc];
                            }
                            dxv[ic] += dsum;
                        }
                    }
                }
            }
        }
    }
    return dx;
}

// ------------------------------------------------------------------ Relu

Tensor Relu::forward(const Tensor& x, bool) {
    input_ = x;
    Tensor y = x;
    for (float& v : y.data)
        if (v < 0.0f) v = 0.0f;
    return y;
}

Tensor Relu::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
        if (input_.data[i] <= 0.0f) dx.data[i] = 0.0f;
    return dx;
}

// -------------------------------------------------------------- AvgPool2

Tensor AvgPool2::forward(const Tensor& x, bool) {
    in_shape_ = x.shape;
    const int oh = x.h() / 2, ow = x.w() / 2;
    if (oh == 0 || ow == 0) throw ConfigError("avgpool2 input smaller than 2x2");
    Tensor y(x.n(), oh, ow, x.c());
    for (int n = 0; n < x.n(); ++n)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int c = 0; c < x.c(); ++c)
                    y.at(n, oy, ox, c) = 0.25f * (x.at(n, 2 * oy, 2 * ox, c) +
                                                  x.at(n, 2 * oy, 2 * ox + 1, c) +
                                                  x.at(n, 2 * oy + 1, 2 * ox, c) +
                                                  x.at(n, 2 * oy + 1, 2 * ox + 1, c));
    return y;
}

Tensor AvgPool2::backward(const Tensor& dy) {
    Tensor dx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    for (int n = 0; n < dy.n(); ++n)
        for (int oy = 0; oy < dy.h(); ++oy)
            for (int ox = 0; ox < dy.w(); ++ox)
                for (int c = 0; c < dy.c(); ++c) {
                    const float g = 0.25f * dy.at(n, oy, ox, c);
                    dx.at(n, 2 * oy, 2 * ox, c) = g;
                    dx.at(n, 2 * oy, 2 * ox + 1, c) = g;
                    dx.at(n, 2 * oy + 1, 2 * ox, c) = g;
                    dx.at(n, 2 * oy + 1, 2 * ox + 1, c) = g;
                }
    return dx;
}

// --------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, bool) {
    in_shape_ = x.shape;
    Tensor y(x.n(), 1, 1, x.c());
    const float inv = 1.0f / static_cast<float>(x.h() * x.w());
    for (int n = 0; n < x.n(); ++n) {
        float* out = &y.at(n, 0, 0, 0);
        for (int h = 0; h < x.h(); ++h)
            for (int w = 0; w < x.w(); ++w) {
                const float* v = &x.at(n, h, w, 0);
                for (int c = 0; c < x.c(); ++c) out[c] += v[c];
            }
        for (int c = 0; c < x.c(); ++c) out[c] *= inv;
    }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    Tensor dx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    const float inv = 1.0f / static_cast<float>(in_shape_[1] * in_shape_[2]);
    for (int n = 0; n < dx.n(); ++n)
        for (int h = 0; h < dx.h(); ++h)
            for (int w = 0; w < dx.w(); ++w) {
                float* v = &dx.at(n, h, w, 0);
                const float* g = &dy.at(n, 0, 0, 0);
                for (int c = 0; c < dx.c(); ++c) v[c] = g[c] * inv;
            }
    return dx;
}

// --------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, bool) {
    in_shape_ = x.shape;
    Tensor y = x;
    y.shape = {x.n(), 1, 1, x.h() * x.w() * x.c()};
    return y;
}

Tensor Flatten::backward(const Tensor& dy) {
    Tensor dx = dy;
    dx.shape = in_shape_;
    return dx;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(int in_features, int out_features) : in_f_(in_features), out_f_(out_features) {
    weight_.name = "dense.weight";
    weight_.shape = {in_f_, out_f_};
    weight_.values.assign(static_cast<std::size_t>(in_f_) * out_f_, 0.0f);
    weight_.grads = weight_.values;
    bias_.name = "dense.bias";
    bias_.shape = {out_f_};
    bias_.values.assign(static_cast<std::size_t>(out_f_), 0.0f);
    bias_.grads = bias_.values;
}

LayerSpec Dense::spec() const {
    return {"dense", {{"in", static_cast<double>(in_f_)}, {"out", static_cast<double>(out_f_)}}};
}

void Dense::init(Rng& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(in_f_ + out_f_));
    for (float& w : weight_.values) w = rng.next_float(-limit, limit);
    std::fill(bias_.values.begin(), bias_.values.end(), 0.0f);
}

Tensor Dense::forward(const Tensor& x, bool) {
    check_vector_input(x, in_f_, "dense");
    input_ = x;
    Tensor y(x.n(), 1, 1, out_f_);
    for (int n = 0; n < x.n(); ++n) {
        const float* xv = &x.at(n, 0, 0, 0);
        float* yv = &y.at(n, 0, 0, 0);
        std::memcpy(yv, bias_.values.data(), sizeof(float) * out_f_);
        for (int i = 0; i < in_f_; ++i) {
            const float xi = xv[i];
            if (xi == 0.0f) continue;
            const float* wrow = &weight_.values[static_cast<std::size_t>(i) * out_f_];
            for (int o = 0; o < out_f_; ++o) yv[o] += xi * wrow[o];
        }
    }
    return y;
}

Tensor Dense::backward(const Tensor& dy) {
    zero_grads(weight_);
    zero_grads(bias_);
    Tensor dx(input_.n(), 1, 1, in_f_);
    for (int n = 0; n < dy.n(); ++n) {
        const float* g = &dy.at(n, 0, 0, 0);
        const float* xv = &input_.at(n, 0, 0, 0);
        float* dxv = &dx.at(n, 0, 0, 0);
        for (int o = 0; o < out_f_; ++o) bias_.grads[o] += g[o];
        for (int i = 0; i < in_f_; ++i) {
            const float xi = xv[i];
            const float* wrow = &weight_.values[static_cast<std::size_t>(i) * out_f_];
            float* gwrow = &weight_.grads[static_cast<std::size_t>(i) * out_f_];
            float dsum = 0.0f;
            for (int o = 0; o < out_f_; ++o) {
                gwrow[o] += xi * g[o];
                dsum += wrow[o] * g[o];
            }
            dxv[i] = dsum;
        }
    }
    return dx;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
    if (rate_ < 0.0 || rate_ >= 1.0)
        throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate_));
}

LayerSpec Dropout::spec() const { return {"dropout", {{"rate", rate_}}}; }

Tensor Dropout::forward(const Tensor& x, bool training) {
    if (!training || rate_ <= 0.0) {
        mask_.clear();
        return x;
    }
    const float keep = 1.0f - static_cast<float>(rate_);
    const float scale = 1.0f / keep;
    mask_.resize(x.data.size());
    Tensor y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const bool kept = rng_.next_float() < keep;
        mask_[i] = kept ? scale : 0.0f;
        y.data[i] *= mask_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& dy) {
    if (mask_.empty()) return dy;
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
}

// --------------------------------------------------------------- Softmax

Tensor Softmax::forward(const Tensor& x, bool) {
    Tensor y = x;
    const int k = x.c();
    for (int n = 0; n < x.n(); ++n) {
        float* row = &y.at(n, 0, 0, 0);
        float m = row[0];
        for (int i = 1; i < k; ++i) m = std::max(m, row[i]);
        float sum = 0.0f;
        for (int i = 0; i < k; ++i) {
            row[i] = std::exp(row[i] - m);
            sum += row[i];
        }
        const float inv = 1.0f / sum;
        for (int i = 0; i < k; ++i) row[i] *= inv;
    }
    output_ = y;
    return y;
}

Tensor Softmax::backward(const Tensor& dy) {
    Tensor dx = dy;
    const int k = dy.c();
    for (int n = 0; n < dy.n(); ++n) {
        const float* p = &output_.at(n, 0, 0, 0);
        const float* g = &dy.at(n, 0, 0, 0);
        float dot = 0.0f;
        for (int i = 0; i < k; ++i) dot += g[i] * p[i];
        float* d = &dx.at(n, 0, 0, 0);
        for (int i = 0; i < k; ++i) d[i] = p[i] * (g[i] - dot);
    }
    return dx;
}

// ----------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x, bool training) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, training);
    return cur;
}

void Sequential::backward(const Tensor& dy) {
    // Find the deepest layer that still needs parameter gradients; there is
    // no point propagating below it (e.g. into a frozen backbone).
    int stop = static_cast<int>(layers_.size());
    for (int i = 0; i < static_cast<int>(layers_.size()); ++i) {
        if (layers_[i]->trainable() && !layers_[i]->params().empty()) {
            stop = i;
            break;
        }
    }
    if (stop == static_cast<int>(layers_.size())) return;

    Tensor grad = dy;
    for (int i = static_cast<int>(layers_.size()) - 1; i >= stop; --i)
        grad = layers_[i]->backward(grad);
}

std::vector<Layer*> Sequential::layers() const {
    std::vector<Layer*> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_) out.push_back(l.get());
    return out;
}

std::vector<ParamTensor*> Sequential::parameters(bool trainable_only) const {
    std::vector<ParamTensor*> out;
    for (const auto& l : layers_) {
        if (trainable_only && !l->trainable()) continue;
        for (ParamTensor* p : l->params()) out.push_back(p);
    }
    return out;
}

std::size_t Sequential::parameter_count(bool trainable_only) const {
    std::size_t count = 0;
    for (ParamTensor* p : parameters(trainable_only)) count += p->size();
    return count;
}

// ----------------------------------------------------------------- Adam

AdamOptimizer::AdamOptimizer(std::vector<ParamTensor*> params, const AdamConfig& config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (ParamTensor* p : params_) {
        m_.emplace_back(p->size(), 0.0f);
        v_.emplace_back(p->size(), 0.0f);
    }
}

void AdamOptimizer::step() {
    ++step_count_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        ParamTensor& p = *params_[pi];
        std::vector<float>& m = m_[pi];
        std::vector<float>& v = v_[pi];
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double g = p.grads[i];
            m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * g);
            v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * g * g);
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.values[i] -= static_cast<float>(config_.learning_rate * mhat /
                                              (std::sqrt(vhat) + config_.epsilon));
        }
    }
}

// --------------------------------------------------------------- factory

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, std::uint64_t dropout_seed) {
    auto attr = [&spec](const char* key) {
        auto it = spec.attrs.find(key);
        if (it == spec.attrs.end())
            throw DataError("layer spec '" + spec.kind + "' missing attribute '" + key + "'");
        return it->second;
    };
    if (spec.kind == "conv")
        return std::make_unique<Conv2d>(static_cast<int>(attr("in")), static_cast<int>(attr("out")),
                                        static_cast<int>(attr("kernel")),
                                        static_cast<int>(attr("pad")));
    if (spec.kind == "relu") return std::make_unique<Relu>();
    if (spec.kind == "avgpool2") return std::make_unique<AvgPool2>();
    if (spec.kind == "global_avg_pool") return std::make_unique<GlobalAvgPool>();
    if (spec.kind == "flatten") return std::make_unique<Flatten>();
    if (spec.kind == "dense")
        return std::make_unique<Dense>(static_cast<int>(attr("in")), static_cast<int>(attr("out")));
    if (spec.kind == "dropout") return std::make_unique<Dropout>(attr("rate"), dropout_seed);
    if (spec.kind == "softmax") return std::make_unique<Softmax>();
    throw DataError("unknown layer kind: " + spec.kind);
}

} // namespace cyto
