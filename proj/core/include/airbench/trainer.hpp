#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "airbench/augment.hpp"
#include "airbench/dataset.hpp"
#include "airbench/init.hpp"
#include "airbench/net.hpp"
#include "airbench/optim.hpp"

namespace airbench {

// Everything one training run needs besides the data and the seed.
struct TrainConfig {
    HyperParams hp;
    NetConfig net = NetConfig::airbench94();
    AugmentPolicy policy;
    SamplingMode sampling = SamplingMode::RandomReshuffle;
    WhitenConfig whiten;

    void validate(int64_t train_size) const;
};

// Per-run record: one row per epoch plus the final TTA row. Timed segments
// are whitening init, each epoch's training section, and the final TTA
// evaluation; the per-epoch plain evaluations are untimed.
struct RunLog {
    int64_t run = 0;
    uint64_t seed = 0;
    HyperParams hp;
    NetConfig net;
    AugmentPolicy policy;
    SamplingMode sampling = SamplingMode::RandomReshuffle;

    struct EpochRow {
        int64_t epoch = 0; // 0-based, matching the reference loop variable
        double train_loss = 0.0;
        double train_acc = 0.0;
        double val_acc = 0.0;
    };
    std::vector<EpochRow> epochs;
    double tta_val_acc = 0.0;
    double total_time_seconds = 0.0;

    // One JSON object per epoch row followed by a summary object. Timing can
    // be excluded so logs of repeated runs can be compared bit-for-bit.
    std::string to_jsonl(bool include_timing = true) const;
    std::string summary_json(bool include_timing = true) const;
};

struct TrainOutput {
    RunLog log;
    Net net;
};

// Writes the airbench console table header/rows to *console when non-null.
void print_run_table_header(std::ostream& os);

TrainOutput train(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
                  uint64_t seed, int64_t run_index = 0, std::ostream* console = nullptr);

// One throwaway training run on uniformly random labels; warms allocator and
// code paths so timed runs exclude one-time costs. The dataset is untouched.
void warmup(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
            uint64_t seed = 0, std::ostream* console = nullptr);

struct RunStats {
    int64_t n = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample stddev, n >= 2 only
    double ci95 = 0.0;   // 1.96 * stddev / sqrt(n)
    bool has_stddev = false;
    std::vector<double> accuracies;
    std::vector<RunLog> logs;
};

RunStats run_many(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data,
                  const std::vector<uint64_t>& seeds, std::ostream* console = nullptr);

} // namespace airbench
