#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "airbench/net.hpp"

namespace airbench {

// Training hyperparameters, defaulting to the airbench94 recipe. lr and
// weight_decay are expressed per 1024 examples and decoupled from momentum
// via the kilostep normalization (see decouple()).
struct HyperParams {
    float lr = 11.5f;
    float momentum = 0.85f;
    float weight_decay = 0.0153f;
    float bias_scaler = 64.0f;
    float label_smoothing = 0.2f;
    int64_t batch_size = 1024;
    double train_epochs = 9.9;
    int whiten_bias_epochs = 3;
    int tta_level = 2;
    float lr_start_frac = 0.2f;
    float lr_end_frac = 0.07f;
    float lr_peak_frac = 0.23f;

    void validate() const;
};

// Per-step rates derived from the per-1024 hyperparameters. The decay
// coefficients are premultiplied into the gradient (PyTorch-style weight
// decay d·w added to the gradient), chosen as wd_step/lr_group so the
// realized shrinkage lr_group·d·w is the same for both groups.
struct DecoupledRates {
    double kilostep = 0.0;
    double lr_step = 0.0;      // Other group
    double lr_bias_step = 0.0; // NormBias group
    double wd_step = 0.0;
    double decay_other = 0.0;
    double decay_bias = 0.0;
};

DecoupledRates decouple(const HyperParams& hp);

// Piecewise-linear schedule through (0,start), (floor(peak*total),1),
// (total,end), evaluated at integer steps 0..total.
double triangle_at(int64_t total_steps, double start, double end, double peak, int64_t step);
std::vector<double> triangle(int64_t total_steps, double start, double end, double peak);

// Nesterov SGD over ParamRef views with per-group learning rates and
// decoupled decay. Momentum buffers are keyed by parameter name and persist
// across steps even when a parameter temporarily leaves the trainable set.
class Sgd {
public:
    explicit Sgd(const HyperParams& hp);

    // One update over the given parameters (normally net.trainable_params()).
    // schedule_value scales both group learning rates.
    void step(const std::vector<ParamRef>& params, double schedule_value);

    const DecoupledRates& rates() const { return rates_; }

private:
    float momentum_;
    DecoupledRates rates_;
    std::unordered_map<std::string, std::vector<float>> buffers_;
};

// EMA shadow of every float entry of the model (parameters and BN running
// stats). update() folds the current model into the EMA and writes the EMA
// back into the model.
class LookaheadState {
public:
    explicit LookaheadState(Net& net);

    // ema <- decay*ema + (1-decay)*param; param <- ema.
    void update(Net& net, double decay);

    // Schedule 0.95^5 * (step/total)^3; the final call uses decay 1.0.
    static double decay_at(int64_t step, int64_t total);

private:
    std::vector<std::pair<std::string, std::vector<float>>> ema_;
};

} // namespace airbench
