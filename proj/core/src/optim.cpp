#include "airbench/optim.hpp"

#include <cmath>
#include <cstring>

#include "airbench/errors.hpp"

namespace airbench {

void HyperParams::validate() const {
    if (momentum < 0.0f || momentum >= 1.0f)
        throw ArgumentError("momentum must be in [0,1), got " + std::to_string(momentum));
    if (lr <= 0.0f || weight_decay < 0.0f || bias_scaler <= 0.0f)
        throw ArgumentError("lr/bias_scaler must be > 0 and weight_decay >= 0");
    if (label_smoothing < 0.0f || label_smoothing >= 1.0f)
        throw ArgumentError("label_smoothing must be in [0,1)");
    if (batch_size <= 0) throw ArgumentError("batch_size must be > 0");
    if (train_epochs <= 0.0) throw ArgumentError("train_epochs must be > 0");
    if (whiten_bias_epochs < 0) throw ArgumentError("whiten_bias_epochs must be >= 0");
    if (tta_level < 0 || tta_level > 2) throw ArgumentError("tta_level must be 0, 1, or 2");
    if (lr_peak_frac <= 0.0f || lr_peak_frac >= 1.0f)
        throw ArgumentError("lr_peak_frac must be in (0,1)");
    if (lr_start_frac < 0.0f || lr_end_frac < 0.0f)
        throw ArgumentError("schedule fractions must be >= 0");
}

DecoupledRates decouple(const HyperParams& hp) {
    hp.validate();
    DecoupledRates r;
    double m = hp.momentum;
    r.kilostep = 1024.0 * (1.0 + 1.0 / (1.0 - m));
    r.lr_step = hp.lr / r.kilostep;
    r.lr_bias_step = r.lr_step * hp.bias_scaler;
    r.wd_step = static_cast<double>(hp.weight_decay) * hp.batch_size / r.kilostep;
    r.decay_other = r.wd_step / r.lr_step;
    r.decay_bias = r.wd_step / r.lr_bias_step;
    return r;
}

double triangle_at(int64_t total_steps, double start, double end, double peak, int64_t step) {
    if (total_steps <= 0) throw ArgumentError("triangle needs total_steps > 0");
    if (peak <= 0.0 || peak >= 1.0) throw ArgumentError("triangle needs 0 < peak < 1");
    int64_t pk = static_cast<int64_t>(peak * total_steps);
    if (step <= pk) {
        if (pk == 0) return 1.0;
        return start + (1.0 - start) * static_cast<double>(step) / static_cast<double>(pk);
    }
    return 1.0 + (end - 1.0) * static_cast<double>(step - pk) /
                     static_cast<double>(total_steps - pk);
}

std::vector<double> triangle(int64_t total_steps, double start, double end, double peak) {
    std::vector<double> out(static_cast<size_t>(total_steps) + 1);
    for (int64_t s = 0; s <= total_steps; ++s)
        out[static_cast<size_t>(s)] = triangle_at(total_steps, start, end, peak, s);
    return out;
}

Sgd::Sgd(const HyperParams& hp) : momentum_(hp.momentum), rates_(decouple(hp)) {}

void Sgd::step(const std::vector<ParamRef>& params, double schedule_value) {
    for (const auto& ref : params) {
        if (!ref.is_param || !ref.trainable) continue;
        if (ref.grad == nullptr)
            throw StateError("sgd step on " + ref.name + " without a gradient");

        bool is_bias = ref.group == ParamGroup::NormBias;
        float lr = static_cast<float>((is_bias ? rates_.lr_bias_step : rates_.lr_step) *
                                      schedule_value);
        float decay = static_cast<float>(is_bias ? rates_.decay_bias : rates_.decay_other);
        float m = momentum_;

        auto& buf = buffers_[ref.name];
        if (buf.empty()) buf.assign(static_cast<size_t>(ref.size), 0.0f);
        else if (static_cast<int64_t>(buf.size()) != ref.size)
            throw StateError("momentum buffer shape changed for " + ref.name);

        float* w = ref.data;
        const float* g = ref.grad;
        float* b = buf.data();
        for (int64_t i = 0; i < ref.size; ++i) {
            float eff = g[i] + decay * w[i];
            b[i] = m * b[i] + eff;
            w[i] -= lr * (eff + m * b[i]);
        }
    }
}

LookaheadState::LookaheadState(Net& net) {
    for (const auto& ref : net.float_state()) {
        ema_.emplace_back(ref.name,
                          std::vector<float>(ref.data, ref.data + ref.size));
    }
}

void LookaheadState::update(Net& net, double decay) {
    auto refs = net.float_state();
    if (refs.size() != ema_.size())
        throw StateError("lookahead state entry count changed");
    float d = static_cast<float>(decay);
    for (size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].name != ema_[i].first)
            throw StateError("lookahead state order changed at " + refs[i].name);
        float* e = ema_[i].second.data();
        float* w = refs[i].data;
        for (int64_t j = 0; j < refs[i].size; ++j) {
            e[j] = d * e[j] + (1.0f - d) * w[j];
            w[j] = e[j];
        }
    }
}

double LookaheadState::decay_at(int64_t step, int64_t total) {
    if (total <= 0) throw ArgumentError("lookahead schedule needs total > 0");
    double frac = static_cast<double>(step) / static_cast<double>(total);
    return std::pow(0.95, 5) * frac * frac * frac;
}

} // namespace airbench
