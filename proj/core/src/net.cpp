#include "airbench/net.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>
#include <utility>

#include "airbench/errors.hpp"
#include "airbench/init.hpp"

namespace airbench {

NetConfig NetConfig::airbench94() { return NetConfig{}; }

NetConfig NetConfig::airbench95() {
    NetConfig c;
    c.block1 = 128;
    c.block2 = 384;
    c.block3 = 384;
    return c;
}

NetConfig NetConfig::airbench96() {
    NetConfig c;
    c.block1 = 128;
    c.block2 = 512;
    c.block3 = 512;
    c.convs_per_block = 3;
    c.residual = true;
    return c;
}

NetConfig NetConfig::scaled(double s) const {
    if (!(s > 0.0)) throw ArgumentError("width scale must be positive");
    NetConfig c = *this;
    c.block1 = std::max<int64_t>(1, std::llround(static_cast<double>(block1) * s));
    c.block2 = std::max<int64_t>(1, std::llround(static_cast<double>(block2) * s));
    c.block3 = std::max<int64_t>(1, std::llround(static_cast<double>(block3) * s));
    return c;
}

void NetConfig::validate() const {
    if (block1 <= 0 || block2 <= 0 || block3 <= 0) {
        throw ConfigError("block widths must be positive");
    }
    if (convs_per_block != 2 && convs_per_block != 3) {
        throw ConfigError("convs_per_block must be 2 or 3, got " +
                          std::to_string(convs_per_block));
    }
    if (whiten_width <= 0 || whiten_width % 2 != 0) {
        throw ConfigError("whiten_width must be positive and even");
    }
    if (!(bn_retention >= 0.0f && bn_retention < 1.0f)) {
        throw ConfigError("bn_retention must lie in [0, 1)");
    }
    if (!(output_scale > 0.0f)) throw ConfigError("output_scale must be positive");
}

namespace {

// Framework-default conv/linear init: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
void default_uniform_init(Tensor& w, int64_t fan_in, RngStream& rng) {
    float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    for (auto& v : w.vec()) v = rng.uniform(-bound, bound);
}

} // namespace

Net::Net(const NetConfig& cfg, RngStream& rng) : cfg_(cfg) { build(rng); }

Net::Net(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
    RngStream rng(seed, RngPurpose::WeightInit);
    build(rng);
}

void Net::build(RngStream& rng) {
    cfg_.validate();

    whiten_.weight = Tensor({cfg_.whiten_width, 3, 2, 2});
    whiten_.bias.assign(static_cast<size_t>(cfg_.whiten_width), 0.0f);
    whiten_.grad_bias.assign(static_cast<size_t>(cfg_.whiten_width), 0.0f);
    whiten_.padding = Padding::None;
    whiten_.weight_trainable = false;

    const int64_t widths[3] = {cfg_.block1, cfg_.block2, cfg_.block3};
    int64_t cin = cfg_.whiten_width;
    for (int b = 0; b < 3; ++b) {
        Block blk;
        blk.residual = cfg_.residual;
        int64_t cout = widths[b];
        for (int j = 0; j < cfg_.convs_per_block; ++j) {
            ConvLayer conv;
            int64_t ci = j == 0 ? cin : cout;
            conv.weight = Tensor({cout, ci, 3, 3});
            conv.grad_weight = Tensor({cout, ci, 3, 3});
            default_uniform_init(conv.weight, ci * 9, rng);
            dirac_init(conv.weight);
            blk.convs.push_back(std::move(conv));

            NormLayer norm;
            norm.state = BatchNormState(cout);
            norm.state.retention = cfg_.bn_retention;
            norm.grad_bias.assign(static_cast<size_t>(cout), 0.0f);
            blk.norms.push_back(std::move(norm));
            blk.acts.emplace_back();
        }
        blocks_.push_back(std::move(blk));
        cin = cout;
    }

    head_weight_ = Tensor({10, cfg_.block3});
    head_grad_ = Tensor({10, cfg_.block3});
    default_uniform_init(head_weight_, cfg_.block3, rng);
}

Tensor Net::act(GeluLayer& layer, Tensor x, bool training) {
    if (identity_activations) return x;
    Tensor out = gelu(x, training ? &layer.phi_cache : nullptr);
    if (training) layer.in_cache = std::move(x);
    return out;
}

Tensor Net::act_backward(GeluLayer& layer, const Tensor& grad) {
    if (identity_activations) return grad;
    return gelu_backward(layer.in_cache, layer.phi_cache, grad);
}

Tensor Net::block_forward(Block& b, Tensor x, bool training) {
    Tensor y = conv2d(x, b.convs[0].weight, nullptr, Padding::Same);
    if (training) b.convs[0].in_cache = std::move(x);

    MaxPoolOut pooled = maxpool2d(y, 2);
    if (training) {
        b.pool_in_shape = y.shape();
        b.pool_argmax = std::move(pooled.argmax);
    }

    Tensor z = batchnorm2d(pooled.out, b.norms[0].state, training,
                           training ? &b.norms[0].cache : nullptr);
    if (training) b.norms[0].in_cache = std::move(pooled.out);
    z = act(b.acts[0], std::move(z), training);

    Tensor skip;
    if (b.residual) skip = z;

    for (size_t j = 1; j < b.convs.size(); ++j) {
        Tensor c = conv2d(z, b.convs[j].weight, nullptr, Padding::Same);
        if (training) b.convs[j].in_cache = std::move(z);
        Tensor n = batchnorm2d(c, b.norms[j].state, training,
                               training ? &b.norms[j].cache : nullptr);
        if (training) b.norms[j].in_cache = std::move(c);
        z = act(b.acts[j], std::move(n), training);
    }

    if (b.residual) {
        float* zp = z.data();
        const float* sp = skip.data();
        for (int64_t i = 0; i < z.numel(); ++i) zp[i] += sp[i];
    }
    return z;
}

Tensor Net::block_backward(Block& b, Tensor grad, bool need_input_grad) {
    Tensor skip_grad;
    if (b.residual) skip_grad = grad;

    for (size_t j = b.convs.size(); j-- > 1;) {
        Tensor dn = act_backward(b.acts[j], grad);
        Tensor dc;
        batchnorm2d_backward(b.norms[j].in_cache, b.norms[j].state, b.norms[j].cache, dn,
                             &dc, &b.norms[j].grad_bias);
        Tensor dz;
        conv2d_backward(b.convs[j].in_cache, b.convs[j].weight, Padding::Same, dc, &dz,
                        &b.convs[j].grad_weight, nullptr);
        grad = std::move(dz);
    }

    if (b.residual) {
        float* gp = grad.data();
        const float* sp = skip_grad.data();
        for (int64_t i = 0; i < grad.numel(); ++i) gp[i] += sp[i];
    }

    Tensor dn = act_backward(b.acts[0], grad);
    Tensor dp;
    batchnorm2d_backward(b.norms[0].in_cache, b.norms[0].state, b.norms[0].cache, dn, &dp,
                         &b.norms[0].grad_bias);
    Tensor dy = maxpool2d_backward(b.pool_in_shape, b.pool_argmax, dp);
    Tensor dx;
    conv2d_backward(b.convs[0].in_cache, b.convs[0].weight, Padding::Same, dy,
                    need_input_grad ? &dx : nullptr, &b.convs[0].grad_weight, nullptr);
    return dx;
}

Tensor Net::forward(const Tensor& input, bool training) {
    if (input.rank() != 4 || input.dim(1) != 3 || input.dim(2) != 32 ||
        input.dim(3) != 32) {
        throw ShapeError("expected [N,3,32,32] input, got " + shape_str(input.shape()));
    }
    has_cache_ = training;

    Tensor x = conv2d(input, whiten_.weight, &whiten_.bias, whiten_.padding);
    if (training) whiten_.in_cache = input;
    x = act(whiten_act_, std::move(x), training);

    for (auto& b : blocks_) x = block_forward(b, std::move(x), training);

    MaxPoolOut pooled = maxpool2d(x, 3);
    if (training) {
        final_pool_in_shape_ = x.shape();
        final_pool_argmax_ = std::move(pooled.argmax);
    }
    if (pooled.out.dim(2) != 1 || pooled.out.dim(3) != 1) {
        throw ShapeError("final pooling left spatial extent " +
                         shape_str(pooled.out.shape()));
    }
    int64_t n = pooled.out.dim(0), c = pooled.out.dim(1);
    Tensor flat = pooled.out.reshaped({n, c});
    if (training) head_in_cache_ = flat;

    Tensor logits = linear(flat, head_weight_);
    for (auto& v : logits.vec()) v *= cfg_.output_scale;
    return logits;
}

void Net::backward(const Tensor& grad_logits) {
    if (!has_cache_) {
        throw StateError("backward requires a preceding forward in training mode");
    }
    if (grad_logits.rank() != 2 || grad_logits.dim(0) != head_in_cache_.dim(0) ||
        grad_logits.dim(1) != 10) {
        throw ShapeError("logit grad shape " + shape_str(grad_logits.shape()) +
                         " does not match the cached forward");
    }

    Tensor dlin = grad_logits;
    for (auto& v : dlin.vec()) v *= cfg_.output_scale;

    Tensor dflat;
    linear_backward(head_in_cache_, head_weight_, dlin, &dflat, &head_grad_);
    Tensor dpool = dflat.reshaped({dflat.dim(0), dflat.dim(1), 1, 1});
    Tensor dx = maxpool2d_backward(final_pool_in_shape_, final_pool_argmax_, dpool);

    for (int b = 2; b >= 0; --b) {
        bool need_input = b > 0 || whiten_bias_trainable;
        dx = block_backward(blocks_[static_cast<size_t>(b)], std::move(dx), need_input);
    }

    if (whiten_bias_trainable) {
        Tensor dw = act_backward(whiten_act_, dx);
        conv2d_backward(whiten_.in_cache, whiten_.weight, whiten_.padding, dw, nullptr,
                        nullptr, &whiten_.grad_bias);
    }
}

std::vector<ParamRef> Net::float_state() {
    std::vector<ParamRef> refs;
    auto add_tensor = [&](const std::string& name, Tensor& value, Tensor* grad,
                          bool trainable, ParamGroup group) {
        ParamRef r;
        r.name = name;
        r.data = value.data();
        r.grad = grad ? grad->data() : nullptr;
        r.shape = value.shape();
        r.size = value.numel();
        r.trainable = trainable;
        r.group = group;
        refs.push_back(std::move(r));
    };
    auto add_vec = [&](const std::string& name, std::vector<float>& value,
                       std::vector<float>* grad, bool trainable, bool is_param,
                       ParamGroup group) {
        ParamRef r;
        r.name = name;
        r.data = value.data();
        r.grad = grad ? grad->data() : nullptr;
        r.shape = {static_cast<int64_t>(value.size())};
        r.size = static_cast<int64_t>(value.size());
        r.trainable = trainable;
        r.is_param = is_param;
        r.group = group;
        refs.push_back(std::move(r));
    };

    add_tensor("whiten.weight", whiten_.weight, nullptr, false, ParamGroup::Other);
    add_vec("whiten.bias", whiten_.bias, &whiten_.grad_bias, whiten_bias_trainable, true,
            ParamGroup::Other);
    for (size_t b = 0; b < blocks_.size(); ++b) {
        std::string prefix = "block" + std::to_string(b + 1) + ".";
        Block& blk = blocks_[b];
        for (size_t j = 0; j < blk.convs.size(); ++j) {
            std::string idx = std::to_string(j + 1);
            add_tensor(prefix + "conv" + idx + ".weight", blk.convs[j].weight,
                       &blk.convs[j].grad_weight, true, ParamGroup::Other);
            add_vec(prefix + "norm" + idx + ".bias", blk.norms[j].state.bias,
                    &blk.norms[j].grad_bias, true, true, ParamGroup::NormBias);
            add_vec(prefix + "norm" + idx + ".scale", blk.norms[j].state.scale, nullptr,
                    false, true, ParamGroup::Other);
            add_vec(prefix + "norm" + idx + ".running_mean",
                    blk.norms[j].state.running_mean, nullptr, false, false,
                    ParamGroup::Other);
            add_vec(prefix + "norm" + idx + ".running_var",
                    blk.norms[j].state.running_var, nullptr, false, false,
                    ParamGroup::Other);
        }
    }
    add_tensor("head.weight", head_weight_, &head_grad_, true, ParamGroup::Other);
    return refs;
}

std::vector<ParamRef> Net::parameters() {
    std::vector<ParamRef> out;
    for (auto& r : float_state()) {
        if (r.is_param) out.push_back(r);
    }
    return out;
}

std::vector<ParamRef> Net::trainable_params() {
    std::vector<ParamRef> out;
    for (auto& r : float_state()) {
        if (r.trainable) out.push_back(r);
    }
    return out;
}

int64_t Net::param_count() {
    int64_t total = 0;
    for (auto& r : parameters()) total += r.size;
    return total;
}

NamedTensors Net::state() {
    NamedTensors out;
    for (auto& r : float_state()) {
        Tensor t(r.shape);
        std::memcpy(t.data(), r.data, static_cast<size_t>(r.size) * sizeof(float));
        out.emplace_back(r.name, std::move(t));
    }
    return out;
}

void Net::load_state(const NamedTensors& tensors) {
    std::unordered_map<std::string, const Tensor*> by_name;
    for (const auto& [name, t] : tensors) by_name[name] = &t;
    auto refs = float_state();
    if (by_name.size() != refs.size()) {
        throw IoError("state holds " + std::to_string(by_name.size()) +
                      " tensors, model expects " + std::to_string(refs.size()));
    }
    for (auto& r : refs) {
        auto it = by_name.find(r.name);
        if (it == by_name.end()) throw IoError("state is missing tensor " + r.name);
        const Tensor& t = *it->second;
        if (t.shape() != r.shape) {
            throw IoError("tensor " + r.name + " has shape " + shape_str(t.shape()) +
                          ", expected " + shape_str(r.shape));
        }
        std::memcpy(r.data, t.data(), static_cast<size_t>(r.size) * sizeof(float));
    }
}

double Net::forward_flops_per_image() const {
    double total = 0.0;
    int64_t size = 31; // 32x32 input through the 2x2 valid whiten conv
    total += 2.0 * static_cast<double>(cfg_.whiten_width * 3 * 2 * 2) *
             static_cast<double>(size * size);

    const int64_t widths[3] = {cfg_.block1, cfg_.block2, cfg_.block3};
    int64_t cin = cfg_.whiten_width;
    for (int b = 0; b < 3; ++b) {
        int64_t cout = widths[b];
        total += 2.0 * static_cast<double>(cout * cin * 9) *
                 static_cast<double>(size * size);
        size /= 2;
        for (int j = 1; j < cfg_.convs_per_block; ++j) {
            total += 2.0 * static_cast<double>(cout * cout * 9) *
                     static_cast<double>(size * size);
        }
        cin = cout;
    }
    total += 2.0 * 10.0 * static_cast<double>(cfg_.block3);
    return total;
}

std::vector<int64_t> Net::feature_trace() const {
    std::vector<int64_t> trace;
    int64_t size = 31;
    trace.push_back(size);
    for (int b = 0; b < 3; ++b) {
        size /= 2;
        trace.push_back(size);
    }
    return trace;
}

} // namespace airbench
