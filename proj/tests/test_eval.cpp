#include "airbench/evaluate.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "airbench/dataset.hpp"
#include "airbench/errors.hpp"
#include "airbench/kernels.hpp"
#include "airbench/net.hpp"
#include "airbench/tensor.hpp"
#include "doctest.h"

using namespace airbench;

namespace {

Tensor make_logits(const std::vector<std::vector<float>>& rows) {
    Tensor t({static_cast<int64_t>(rows.size()), static_cast<int64_t>(rows[0].size())});
    float* d = t.data();
    for (const auto& row : rows)
        for (float v : row) *d++ = v;
    return t;
}

// Horizontal mirror of an NCHW batch.
Tensor mirror_images(const Tensor& x) {
    Tensor out(x.shape());
    int64_t n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    const float* src = x.data();
    float* dst = out.data();
    for (int64_t i = 0; i < n * c * h; ++i)
        for (int64_t j = 0; j < w; ++j) dst[i * w + j] = src[i * w + (w - 1 - j)];
    return out;
}

// 32x32 window of a padded NCHW batch starting at (oy, ox).
Tensor crop_window(const Tensor& padded, int64_t oy, int64_t ox) {
    int64_t n = padded.shape()[0], c = padded.shape()[1];
    int64_t ph = padded.shape()[2], pw = padded.shape()[3];
    Tensor out({n, c, 32, 32});
    const float* src = padded.data();
    float* dst = out.data();
    for (int64_t i = 0; i < n * c; ++i)
        for (int64_t y = 0; y < 32; ++y)
            std::memcpy(dst + (i * 32 + y) * 32, src + (i * ph + oy + y) * pw + ox,
                        32 * sizeof(float));
    return out;
}

} // namespace

TEST_CASE("accuracy counts argmax matches with ties toward class 0") {
    Tensor logits = make_logits({
        {0.1f, 0.9f, 0.0f}, // 1
        {2.0f, 1.0f, 1.5f}, // 0
        {0.0f, 0.0f, 0.0f}, // tie -> 0
        {-1.0f, -0.5f, -0.5f}, // tie between 1 and 2 -> 1
    });
    CHECK(accuracy(logits, {1, 0, 0, 1}) == doctest::Approx(1.0));
    CHECK(accuracy(logits, {1, 0, 2, 2}) == doctest::Approx(0.5));
    CHECK(accuracy(logits, {0, 1, 1, 2}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(accuracy(logits, {1, 0, 0}), ShapeError);
    CHECK(accuracy(Tensor({0, 3}), {}) == doctest::Approx(0.0));
}

TEST_CASE("infer level 0 equals a plain eval forward") {
    Net net(NetConfig::airbench94().scaled(0.25), 5);
    Dataset data = make_synthetic(12, 9, 10);
    Tensor x = normalize(data);

    Tensor direct = net.forward(x, /*training=*/false);
    Tensor got = infer(net, x, 0);
    REQUIRE(got.shape() == direct.shape());
    const float* a = got.data();
    const float* b = direct.data();
    int diff = 0;
    for (int64_t i = 0; i < got.numel(); ++i)
        if (a[i] != b[i]) ++diff;
    CHECK(diff == 0);
}

TEST_CASE("infer level 2 matches the six-view weighted oracle") {
    Net net(NetConfig::airbench94().scaled(0.25), 17);
    Dataset data = make_synthetic(9, 31, 10);
    Tensor x = normalize(data);

    // Oracle built from first principles: translated views are 32x32 windows
    // of the reflect-padded batch, each view and its mirror run separately.
    Tensor padded = reflect_pad2d(x, 1);
    struct View {
        int64_t oy, ox;
        double weight;
    };
    const View views[] = {{1, 1, 0.25}, {0, 0, 0.125}, {2, 2, 0.125}};
    Tensor want({x.shape()[0], static_cast<int64_t>(10)});
    std::vector<double> acc(static_cast<size_t>(want.numel()), 0.0);
    for (const View& v : views) {
        Tensor view = crop_window(padded, v.oy, v.ox);
        Tensor out = net.forward(view, false);
        Tensor out_m = net.forward(mirror_images(view), false);
        for (int64_t i = 0; i < want.numel(); ++i) {
            acc[static_cast<size_t>(i)] +=
                v.weight * (static_cast<double>(out.data()[i]) +
                            static_cast<double>(out_m.data()[i]));
        }
    }

    Tensor got = infer(net, x, 2);
    REQUIRE(got.shape() == want.shape());
    for (int64_t i = 0; i < got.numel(); ++i) {
        CHECK(got.data()[i] ==
              doctest::Approx(acc[static_cast<size_t>(i)]).epsilon(2e-5));
    }
}

TEST_CASE("infer level 1 averages the image with its mirror") {
    Net net(NetConfig::airbench94().scaled(0.25), 23);
    Dataset data = make_synthetic(6, 13, 10);
    Tensor x = normalize(data);

    Tensor plain = net.forward(x, false);
    Tensor mirrored = net.forward(mirror_images(x), false);
    Tensor got = infer(net, x, 1);
    for (int64_t i = 0; i < got.numel(); ++i) {
        double want = 0.5 * (static_cast<double>(plain.data()[i]) +
                             static_cast<double>(mirrored.data()[i]));
        CHECK(got.data()[i] == doctest::Approx(want).epsilon(1e-5));
    }
}

TEST_CASE("left-right symmetric input makes level 1 collapse to level 0") {
    Net net(NetConfig::airbench94().scaled(0.25), 3);
    Dataset data = make_synthetic(4, 19, 10);
    Tensor x = normalize(data);
    // Symmetrize: x <- 0.5*(x + mirror(x)) so mirroring is an exact no-op.
    Tensor m = mirror_images(x);
    for (int64_t i = 0; i < x.numel(); ++i)
        x.data()[i] = 0.5f * (x.data()[i] + m.data()[i]);

    Tensor l0 = infer(net, x, 0);
    Tensor l1 = infer(net, x, 1);
    int diff = 0;
    for (int64_t i = 0; i < l0.numel(); ++i)
        if (l0.data()[i] != l1.data()[i]) ++diff;
    CHECK(diff == 0);
}

TEST_CASE("chunking does not change the result") {
    Net net(NetConfig::airbench94().scaled(0.25), 29);
    Dataset data = make_synthetic(23, 41, 10);
    Tensor x = normalize(data);

    for (int level : {0, 2}) {
        CAPTURE(level);
        Tensor whole = infer(net, x, level, 2000);
        Tensor small = infer(net, x, level, 7);
        Tensor exact = infer(net, x, level, 23);
        int diff = 0;
        for (int64_t i = 0; i < whole.numel(); ++i) {
            if (whole.data()[i] != small.data()[i]) ++diff;
            if (whole.data()[i] != exact.data()[i]) ++diff;
        }
        CHECK(diff == 0);
    }
}

TEST_CASE("infer is deterministic and leaves running statistics alone") {
    Net net(NetConfig::airbench94().scaled(0.25), 7);
    Dataset data = make_synthetic(10, 3, 10);
    Tensor x = normalize(data);

    std::vector<std::vector<float>> stats_before;
    for (const auto& ref : net.float_state())
        if (!ref.is_param) stats_before.emplace_back(ref.data, ref.data + ref.size);

    Tensor a = infer(net, x, 2);
    Tensor b = infer(net, x, 2);
    int diff = 0;
    for (int64_t i = 0; i < a.numel(); ++i)
        if (a.data()[i] != b.data()[i]) ++diff;
    CHECK(diff == 0);

    size_t idx = 0;
    int stat_changes = 0;
    for (const auto& ref : net.float_state()) {
        if (ref.is_param) continue;
        for (int64_t j = 0; j < ref.size; ++j)
            if (ref.data[j] != stats_before[idx][static_cast<size_t>(j)]) ++stat_changes;
        ++idx;
    }
    CHECK(stat_changes == 0);
}

TEST_CASE("a zero head makes every level predict class 0") {
    Net net(NetConfig::airbench94().scaled(0.25), 11);
    Tensor& head = net.head_weight();
    std::fill(head.data(), head.data() + head.numel(), 0.0f);

    Dataset data = make_synthetic(20, 5, 10);
    Tensor x = normalize(data);
    std::vector<int32_t> zeros(20, 0);
    for (int level : {0, 1, 2}) {
        Tensor logits = infer(net, x, level);
        CHECK(accuracy(logits, zeros) == doctest::Approx(1.0));
    }
}

TEST_CASE("infer validates its arguments") {
    Net net(NetConfig::airbench94().scaled(0.25), 2);
    Dataset data = make_synthetic(4, 2, 10);
    Tensor x = normalize(data);
    CHECK_THROWS_AS(infer(net, x, 3), ArgumentError);
    CHECK_THROWS_AS(infer(net, x, -1), ArgumentError);
    CHECK_THROWS_AS(infer(net, x, 0, 0), ArgumentError);
    Tensor bad({4, 3, 32});
    CHECK_THROWS_AS(infer(net, bad, 0), ShapeError);
}
