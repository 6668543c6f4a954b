#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airbench/kernels.hpp"
#include "airbench/rng.hpp"
#include "airbench/tensor.hpp"

namespace airbench {

struct NetConfig {
    int64_t block1 = 64;
    int64_t block2 = 256;
    int64_t block3 = 256;
    int convs_per_block = 2;
    bool residual = false;
    int64_t whiten_width = 24;
    float output_scale = 1.0f / 9.0f;
    float bn_retention = 0.6f;

    static NetConfig airbench94();
    static NetConfig airbench95();
    static NetConfig airbench96();

    // Block widths multiplied by s (reduced-scale statistical runs). The
    // whitening layer keeps its fixed width.
    NetConfig scaled(double s) const;
    void validate() const;
};

enum class ParamGroup { NormBias, Other };

// View into one float array of the model: a parameter or a BN running stat.
// Pointers stay valid until the Net is destroyed or copied.
struct ParamRef {
    std::string name;
    float* data = nullptr;
    float* grad = nullptr; // null when no gradient is produced for this entry
    std::vector<int64_t> shape;
    int64_t size = 0;
    bool trainable = false;
    bool is_param = true; // false for running statistics
    ParamGroup group = ParamGroup::Other;
};

// The fixed airbench network: whiten conv + GELU, three conv blocks, maxpool,
// linear head, output scaling. Holds activations for one backward pass.
class Net {
public:
    Net(const NetConfig& cfg, RngStream& rng);
    Net(const NetConfig& cfg, uint64_t seed);

    Tensor forward(const Tensor& input, bool training);
    // Backward for the most recent forward(training=true); fills the grad
    // arrays of every currently trainable parameter.
    void backward(const Tensor& grad_logits);

    // Parameters plus running stats, in registration order.
    std::vector<ParamRef> float_state();
    std::vector<ParamRef> parameters();       // is_param entries only
    std::vector<ParamRef> trainable_params(); // currently trainable only
    int64_t param_count();

    NamedTensors state();
    void load_state(const NamedTensors& tensors);

    double forward_flops_per_image() const;
    // 2 FLOPs per MAC, backward = 2x forward, BN/activation ignored.
    double training_flops(double images_per_step, double steps) const {
        return 3.0 * forward_flops_per_image() * images_per_step * steps;
    }

    const NetConfig& config() const { return cfg_; }
    // Spatial extent after the whiten conv and after each block (32x32 input).
    std::vector<int64_t> feature_trace() const;

    // Trainer contract: the whiten conv bias learns only in early epochs.
    bool whiten_bias_trainable = true;
    // Test harness hook: swap GELU for identity to expose the (positively
    // homogeneous) linear path through the network.
    bool identity_activations = false;

    struct ConvLayer {
        Tensor weight, grad_weight;
        std::vector<float> bias, grad_bias; // whiten conv only
        Padding padding = Padding::Same;
        bool weight_trainable = true;
        Tensor in_cache;
    };
    struct NormLayer {
        BatchNormState state;
        std::vector<float> grad_bias;
        BatchNormCache cache;
        Tensor in_cache;
    };
    struct GeluLayer {
        Tensor in_cache, phi_cache;
    };
    struct Block {
        std::vector<ConvLayer> convs;
        std::vector<NormLayer> norms;
        std::vector<GeluLayer> acts;
        std::vector<int64_t> pool_in_shape;
        std::vector<int32_t> pool_argmax;
        bool residual = false;
    };

    ConvLayer& whiten() { return whiten_; }
    Block& block(int i) { return blocks_[static_cast<size_t>(i)]; }
    Tensor& head_weight() { return head_weight_; }
    Tensor& head_grad() { return head_grad_; }

private:
    void build(RngStream& rng);
    Tensor act(GeluLayer& layer, Tensor x, bool training);
    Tensor act_backward(GeluLayer& layer, const Tensor& grad);
    Tensor block_forward(Block& b, Tensor x, bool training);
    Tensor block_backward(Block& b, Tensor grad, bool need_input_grad);

    NetConfig cfg_;
    ConvLayer whiten_;
    GeluLayer whiten_act_;
    std::vector<Block> blocks_;
    Tensor head_weight_, head_grad_;
    Tensor head_in_cache_;
    std::vector<int64_t> final_pool_in_shape_;
    std::vector<int32_t> final_pool_argmax_;
    bool has_cache_ = false;
};

} // namespace airbench
