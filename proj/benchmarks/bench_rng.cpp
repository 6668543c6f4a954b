#include <benchmark/benchmark.h>

#include <string>

#include "airbench/md5.hpp"
#include "airbench/rng.hpp"

namespace {

void BM_PhiloxBlock(benchmark::State& state) {
    uint64_t i = 0;
    for (auto _ : state) {
        auto block = airbench::philox4x32(1, 2, static_cast<uint32_t>(i++), 0, 0, 0);
        benchmark::DoNotOptimize(block);
    }
    state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_PhiloxBlock);

void BM_StreamU32(benchmark::State& state) {
    airbench::RngStream rng(1, airbench::RngPurpose::Test);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.u32());
    }
}
BENCHMARK(BM_StreamU32);

void BM_Permutation50k(benchmark::State& state) {
    airbench::RngStream rng(1, airbench::RngPurpose::Shuffle);
    for (auto _ : state) {
        auto p = rng.permutation(50000);
        benchmark::DoNotOptimize(p.data());
    }
}
BENCHMARK(BM_Permutation50k);

void BM_Md5Index(benchmark::State& state) {
    uint64_t n = 0;
    for (auto _ : state) {
        std::string digest = airbench::md5_hex(std::to_string(42 * n++));
        benchmark::DoNotOptimize(digest);
    }
}
BENCHMARK(BM_Md5Index);

} // namespace

BENCHMARK_MAIN();
