#include "airbench/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "airbench/errors.hpp"
#include "airbench/evaluate.hpp"
#include "airbench/kernels.hpp"

#include "json.hpp"

namespace airbench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Console table in the airbench layout: fixed column widths, right-justified
// cells, '%.4f' floats, dashes around the header and after the final row.
const std::vector<std::string> kColumns = {
    "run   ", "epoch", "train_loss", "train_acc", "val_acc", "tta_val_acc",
    "total_time_seconds"};

int64_t table_width() {
    int64_t w = 1; // trailing '|'
    for (const auto& c : kColumns) w += 5 + static_cast<int64_t>(c.size());
    return w;
}

std::string fmt4(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

void print_row(std::ostream& os, const std::vector<std::string>& cells, bool final_entry) {
    std::string line;
    for (size_t i = 0; i < kColumns.size(); ++i) {
        std::string cell = i < cells.size() ? cells[i] : "";
        size_t width = kColumns[i].size();
        if (cell.size() < width) cell.insert(0, width - cell.size(), ' ');
        line += "|  " + cell + "  ";
    }
    line += "|";
    os << line << "\n";
    if (final_entry) os << std::string(line.size(), '-') << "\n";
}

nlohmann::ordered_json config_json(const RunLog& log) {
    nlohmann::ordered_json j;
    j["hyp"] = {{"lr", log.hp.lr},
                {"momentum", log.hp.momentum},
                {"weight_decay", log.hp.weight_decay},
                {"bias_scaler", log.hp.bias_scaler},
                {"label_smoothing", log.hp.label_smoothing},
                {"batch_size", log.hp.batch_size},
                {"train_epochs", log.hp.train_epochs},
                {"whiten_bias_epochs", log.hp.whiten_bias_epochs},
                {"tta_level", log.hp.tta_level},
                {"lr_start_frac", log.hp.lr_start_frac},
                {"lr_end_frac", log.hp.lr_end_frac},
                {"lr_peak_frac", log.hp.lr_peak_frac}};
    j["net"] = {{"block1", log.net.block1},
                {"block2", log.net.block2},
                {"block3", log.net.block3},
                {"convs_per_block", log.net.convs_per_block},
                {"residual", log.net.residual},
                {"whiten_width", log.net.whiten_width},
                {"output_scale", log.net.output_scale},
                {"bn_retention", log.net.bn_retention}};
    j["aug"] = {{"flip", to_string(log.policy.flip)},
                {"translate", log.policy.translate_px},
                {"cutout", log.policy.cutout_px}};
    j["sampling"] = to_string(log.sampling);
    return j;
}

} // namespace

void TrainConfig::validate(int64_t train_size) const {
    hp.validate();
    net.validate();
    policy.validate();
    if (whiten.eps <= 0.0f) throw ConfigError("whitening eps must be > 0");
    if (hp.batch_size > train_size)
        throw ConfigError("batch_size " + std::to_string(hp.batch_size) +
                          " exceeds training set size " + std::to_string(train_size));
}

std::string RunLog::to_jsonl(bool include_timing) const {
    std::string out;
    for (const auto& row : epochs) {
        nlohmann::ordered_json j;
        j["run"] = run;
        j["epoch"] = row.epoch;
        j["train_loss"] = row.train_loss;
        j["train_acc"] = row.train_acc;
        j["val_acc"] = row.val_acc;
        out += j.dump();
        out += "\n";
    }
    out += summary_json(include_timing);
    out += "\n";
    return out;
}

std::string RunLog::summary_json(bool include_timing) const {
    nlohmann::ordered_json j;
    j["run"] = run;
    j["seed"] = seed;
    j["tta_val_acc"] = tta_val_acc;
    if (include_timing) j["total_time_seconds"] = total_time_seconds;
    j["config"] = config_json(*this);
    return j.dump();
}

void print_run_table_header(std::ostream& os) {
    os << std::string(static_cast<size_t>(table_width()), '-') << "\n";
    std::vector<std::string> cells(kColumns.begin(), kColumns.end());
    print_row(os, cells, false);
    os << std::string(static_cast<size_t>(table_width()), '-') << "\n";
}

TrainOutput train(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
                  uint64_t seed, int64_t run_index, std::ostream* console) {
    cfg.validate(train_data.n());
    train_data.validate();
    test_data.validate();

    RunLog log;
    log.run = run_index;
    log.seed = seed;
    log.hp = cfg.hp;
    log.net = cfg.net;
    log.policy = cfg.policy;
    log.policy.seed = seed;
    log.sampling = cfg.sampling;

    AugmentPolicy policy = log.policy;
    const HyperParams& hp = cfg.hp;

    Tensor test_images = normalize(test_data);

    Net net(cfg.net, seed);
    Sgd sgd(hp);
    int64_t batches_per_epoch = train_data.n() / hp.batch_size; // drop_last
    int64_t total_steps =
        static_cast<int64_t>(std::ceil(batches_per_epoch * hp.train_epochs));
    int64_t epoch_count = static_cast<int64_t>(std::ceil(hp.train_epochs));
    // The EMA snapshot is taken before the whitening init, as in the
    // reference; the cubic decay schedule makes the stale entries negligible.
    LookaheadState lookahead(net);

    double total_time = 0.0;
    auto t0 = Clock::now();
    init_whiten_layer(net, train_data, cfg.whiten);
    total_time += seconds_since(t0);

    int64_t current_steps = 0;
    double last_loss = 0.0, last_acc = 0.0;
    for (int64_t epoch = 0; epoch < epoch_count; ++epoch) {
        net.whiten_bias_trainable = epoch < hp.whiten_bias_epochs;

        t0 = Clock::now();
        BatchStream stream(train_data, policy, cfg.sampling, hp.batch_size, epoch,
                           /*drop_last=*/true);
        Batch batch;
        while (stream.next(batch)) {
            Tensor logits = net.forward(batch.images, true);
            SoftmaxCeOut ce = softmax_crossentropy(logits, batch.labels, hp.label_smoothing);
            net.backward(ce.grad);
            sgd.step(net.trainable_params(),
                     triangle_at(total_steps, hp.lr_start_frac, hp.lr_end_frac,
                                 hp.lr_peak_frac, current_steps));
            ++current_steps;
            if (current_steps % 5 == 0)
                lookahead.update(net, LookaheadState::decay_at(current_steps, total_steps));

            last_loss = ce.loss / static_cast<double>(hp.batch_size);
            last_acc = accuracy(logits, batch.labels);

            if (current_steps >= total_steps) {
                lookahead.update(net, 1.0);
                break;
            }
        }
        total_time += seconds_since(t0);

        double val_acc = accuracy(infer(net, test_images, 0), test_data.labels);
        log.epochs.push_back({epoch, last_loss, last_acc, val_acc});
        if (console) {
            print_row(*console,
                      {epoch == 0 ? std::to_string(run_index) : "", std::to_string(epoch),
                       fmt4(last_loss), fmt4(last_acc), fmt4(val_acc), "",
                       fmt4(total_time)},
                      false);
        }
    }

    t0 = Clock::now();
    log.tta_val_acc = accuracy(infer(net, test_images, hp.tta_level), test_data.labels);
    total_time += seconds_since(t0);
    log.total_time_seconds = total_time;
    if (console) {
        print_row(*console,
                  {"", "eval", "", "", "", fmt4(log.tta_val_acc), fmt4(total_time)}, true);
    }
    return TrainOutput{std::move(log), std::move(net)};
}

void warmup(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
            uint64_t seed, std::ostream* console) {
    Dataset dummy = train_data;
    RngStream rng(seed, RngPurpose::WarmupLabels);
    uint32_t k = static_cast<uint32_t>(dummy.num_classes());
    for (auto& label : dummy.labels) label = static_cast<int32_t>(rng.below(k));
    (void)train(cfg, dummy, test_data, seed, 0, console);
}

RunStats run_many(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
                  const std::vector<uint64_t>& seeds, std::ostream* console) {
    if (seeds.empty()) throw ArgumentError("run_many needs at least one seed");
    RunStats stats;
    stats.n = static_cast<int64_t>(seeds.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
        TrainOutput out = train(cfg, train_data, test_data, seeds[i],
                                static_cast<int64_t>(i), console);
        stats.accuracies.push_back(out.log.tta_val_acc);
        stats.logs.push_back(std::move(out.log));
    }
    double sum = 0.0;
    for (double a : stats.accuracies) sum += a;
    stats.mean = sum / static_cast<double>(stats.n);
    if (stats.n >= 2) {
        double ss = 0.0;
        for (double a : stats.accuracies) ss += (a - stats.mean) * (a - stats.mean);
        stats.stddev = std::sqrt(ss / static_cast<double>(stats.n - 1));
        stats.ci95 = 1.96 * stats.stddev / std::sqrt(static_cast<double>(stats.n));
        stats.has_stddev = true;
    }
    return stats;
}

} // namespace airbench
