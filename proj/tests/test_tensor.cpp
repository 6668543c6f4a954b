#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "airbench/errors.hpp"
#include "airbench/rng.hpp"
#include "airbench/tensor.hpp"

using namespace airbench;

namespace {

// Unique temp path per test name; removed by the caller.
std::string tmp_path(const std::string& tag) {
    return "tensor_test_" + tag + ".bin";
}

} // namespace

TEST_CASE("tensor shape and accessors") {
    Tensor t({2, 3, 4, 5});
    CHECK(t.rank() == 4);
    CHECK(t.numel() == 120);
    CHECK(t.dim(0) == 2);
    CHECK(t.dim(3) == 5);
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<float>(i);
    CHECK(t.at({0, 0, 0, 0}) == 0.0f);
    CHECK(t.at({1, 2, 3, 4}) == 119.0f);
    CHECK(t(1, 2, 3, 4) == 119.0f);
    CHECK(t(0, 1, 2, 3) == t.at({0, 1, 2, 3}));
}

TEST_CASE("tensor fill, zero, full") {
    Tensor t = Tensor::full({3, 3}, 2.5f);
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(t.data()[i] == 2.5f);
    t.zero();
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(t.data()[i] == 0.0f);
}

TEST_CASE("tensor reshaped preserves data and checks element count") {
    Tensor t({2, 6});
    for (int64_t i = 0; i < 12; ++i) t.data()[i] = static_cast<float>(i * i);
    Tensor r = t.reshaped({3, 4});
    CHECK(r.rank() == 2);
    CHECK(r.dim(0) == 3);
    for (int64_t i = 0; i < 12; ++i) CHECK(r.data()[i] == t.data()[i]);
    CHECK_THROWS_AS((void)t.reshaped({5, 5}), ShapeError);
}

TEST_CASE("tensor all_finite") {
    Tensor t({4});
    CHECK(t.all_finite());
    t.data()[2] = std::numeric_limits<float>::infinity();
    CHECK_FALSE(t.all_finite());
    t.data()[2] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("shape helpers") {
    CHECK(shape_numel({2, 3, 4}) == 24);
    CHECK(shape_numel({}) == 1);
    CHECK(shape_str({24, 3, 32, 32}) == "[24, 3, 32, 32]");
}

TEST_CASE("tensor ctor rejects negative extents and mismatched data") {
    CHECK_THROWS_AS(Tensor({2, -1}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>(3)), ShapeError);
}

TEST_CASE("archive round-trip is bit-exact across shapes and values") {
    RngStream rng(7, RngPurpose::Test);
    NamedTensors saved;
    std::vector<std::vector<int64_t>> shapes = {
        {1}, {5}, {3, 7}, {2, 3, 4, 5}, {1, 1, 1, 1, 6},
    };
    for (size_t k = 0; k < shapes.size(); ++k) {
        Tensor t(shapes[k]);
        for (int64_t i = 0; i < t.numel(); ++i)
            t.data()[i] = rng.uniform(-100.0f, 100.0f);
        saved.emplace_back("tensor_" + std::to_string(k), std::move(t));
    }
    // Special values must survive too.
    Tensor specials({6});
    specials.data()[0] = 0.0f;
    specials.data()[1] = -0.0f;
    specials.data()[2] = std::numeric_limits<float>::infinity();
    specials.data()[3] = -std::numeric_limits<float>::infinity();
    specials.data()[4] = std::numeric_limits<float>::quiet_NaN();
    specials.data()[5] = std::numeric_limits<float>::denorm_min();
    saved.emplace_back("specials", std::move(specials));

    std::string path = tmp_path("roundtrip");
    save_tensor_archive(path, saved);
    NamedTensors loaded = load_tensor_archive(path);
    std::remove(path.c_str());

    REQUIRE(loaded.size() == saved.size());
    for (size_t k = 0; k < saved.size(); ++k) {
        CHECK(loaded[k].first == saved[k].first);
        REQUIRE(loaded[k].second.same_shape(saved[k].second));
        const float* a = saved[k].second.data();
        const float* b = loaded[k].second.data();
        for (int64_t i = 0; i < saved[k].second.numel(); ++i) {
            // Compare representations, not values, so NaN round-trips count.
            uint32_t ua, ub;
            std::memcpy(&ua, &a[i], 4);
            std::memcpy(&ub, &b[i], 4);
            CHECK(ua == ub);
        }
    }
}

TEST_CASE("archive save writes the documented layout") {
    NamedTensors t;
    t.emplace_back("w", Tensor({2}, {1.0f, -2.0f}));
    std::string path = tmp_path("layout");
    save_tensor_archive(path, t);

    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::remove(path.c_str());

    // magic + count + (name len + "w" + rank + extent + 2 floats)
    REQUIRE(bytes.size() == 4 + 4 + 2 + 1 + 1 + 8 + 8);
    CHECK(bytes.substr(0, 4) == "ABT1");
    CHECK(static_cast<uint8_t>(bytes[4]) == 1);  // count, LE
    CHECK(static_cast<uint8_t>(bytes[8]) == 1);  // name length, LE
    CHECK(bytes[10] == 'w');
    CHECK(static_cast<uint8_t>(bytes[11]) == 1); // rank
    CHECK(static_cast<uint8_t>(bytes[12]) == 2); // extent, LE
    float v0, v1;
    std::memcpy(&v0, bytes.data() + 20, 4);
    std::memcpy(&v1, bytes.data() + 24, 4);
    CHECK(v0 == 1.0f);
    CHECK(v1 == -2.0f);
}

TEST_CASE("archive load rejects bad magic and truncation") {
    std::string path = tmp_path("bad");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS_AS((void)load_tensor_archive(path), IoError);
    std::remove(path.c_str());

    NamedTensors t;
    t.emplace_back("w", Tensor({4, 4}));
    save_tensor_archive(path, t);
    {
        // Chop off the last 8 bytes of payload.
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
    }
    CHECK_THROWS_AS((void)load_tensor_archive(path), IoError);
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)load_tensor_archive("does_not_exist_anywhere.bin"), IoError);
}
