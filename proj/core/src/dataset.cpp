#include "airbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "airbench/errors.hpp"
#include "airbench/rng.hpp"

namespace airbench {

namespace {

constexpr int64_t kImageBytes = 3 * 32 * 32;
constexpr int64_t kCifarRecord = 1 + kImageBytes;

const std::vector<std::string> kCifarClasses = {
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    in.seekg(0, std::ios::end);
    auto size = static_cast<int64_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw IoError("failed reading " + path);
    return bytes;
}

void append_cifar_batch(Dataset& out, const std::string& path) {
    auto bytes = read_file(path);
    if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
        throw IoError(path + ": " + std::to_string(bytes.size()) +
                      " bytes is not a whole number of 3073-byte records");
    }
    int64_t n = static_cast<int64_t>(bytes.size()) / kCifarRecord;
    for (int64_t r = 0; r < n; ++r) {
        const uint8_t* rec = bytes.data() + r * kCifarRecord;
        if (rec[0] >= 10) {
            throw IoError(path + ": record " + std::to_string(r) +
                          " has label byte " + std::to_string(rec[0]));
        }
        out.labels.push_back(rec[0]);
        out.images.insert(out.images.end(), rec + 1, rec + kCifarRecord);
    }
}

} // namespace

void Dataset::validate() const {
    if (images.size() != static_cast<size_t>(n()) * kImageBytes) {
        throw ShapeError("dataset holds " + std::to_string(images.size()) +
                         " image bytes for " + std::to_string(n()) + " labels");
    }
    for (int64_t i = 0; i < n(); ++i) {
        if (labels[static_cast<size_t>(i)] < 0 ||
            labels[static_cast<size_t>(i)] >= num_classes()) {
            throw ArgumentError("label " + std::to_string(labels[static_cast<size_t>(i)]) +
                                " at index " + std::to_string(i) + " outside [0, " +
                                std::to_string(num_classes()) + ")");
        }
    }
}

Dataset load_cifar10(const std::string& dir, const std::string& split) {
    Dataset out;
    out.classes = kCifarClasses;
    if (split == "train") {
        for (int b = 1; b <= 5; ++b) {
            append_cifar_batch(out, dir + "/data_batch_" + std::to_string(b) + ".bin");
        }
    } else if (split == "test") {
        append_cifar_batch(out, dir + "/test_batch.bin");
    } else {
        throw ArgumentError("split must be 'train' or 'test', got '" + split + "'");
    }
    return out;
}

Dataset load_ads1(const std::string& path) {
    auto bytes = read_file(path);
    constexpr size_t kHeader = 4 + 4 + 1;
    if (bytes.size() < kHeader || std::memcmp(bytes.data(), "ADS1", 4) != 0) {
        throw IoError(path + ": not an ADS1 archive");
    }
    uint32_t n = static_cast<uint32_t>(bytes[4]) | (static_cast<uint32_t>(bytes[5]) << 8) |
                 (static_cast<uint32_t>(bytes[6]) << 16) | (static_cast<uint32_t>(bytes[7]) << 24);
    uint8_t num_classes = bytes[8];
    size_t expect = kHeader + static_cast<size_t>(n) * (kImageBytes + 1);
    if (bytes.size() != expect) {
        throw IoError(path + ": expected " + std::to_string(expect) + " bytes for " +
                      std::to_string(n) + " images, found " + std::to_string(bytes.size()));
    }
    Dataset out;
    for (int c = 0; c < num_classes; ++c) out.classes.push_back("class_" + std::to_string(c));
    out.images.assign(bytes.begin() + kHeader,
                      bytes.begin() + static_cast<int64_t>(kHeader) + int64_t{n} * kImageBytes);
    const uint8_t* lab = bytes.data() + kHeader + int64_t{n} * kImageBytes;
    for (uint32_t i = 0; i < n; ++i) {
        if (lab[i] >= num_classes) {
            throw IoError(path + ": label " + std::to_string(lab[i]) + " at index " +
                          std::to_string(i) + " exceeds class count " +
                          std::to_string(num_classes));
        }
        out.labels.push_back(lab[i]);
    }
    return out;
}

void save_ads1(const std::string& path, const Dataset& data) {
    data.validate();
    if (data.num_classes() > 255) {
        throw ArgumentError("ADS1 stores at most 255 classes, got " +
                            std::to_string(data.num_classes()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("ADS1", 4);
    auto n = static_cast<uint32_t>(data.n());
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((n >> (8 * i)) & 0xff));
    out.put(static_cast<char>(data.num_classes()));
    out.write(reinterpret_cast<const char*>(data.images.data()),
              static_cast<std::streamsize>(data.images.size()));
    for (int32_t lab : data.labels) out.put(static_cast<char>(lab));
    if (!out) throw IoError("failed writing " + path);
}

void normalize_image(const uint8_t* src, float* dst, const NormalizeParams& p) {
    for (int c = 0; c < 3; ++c) {
        float inv_std = 1.0f / p.std[static_cast<size_t>(c)];
        float mean = p.mean[static_cast<size_t>(c)];
        const uint8_t* s = src + c * 1024;
        float* d = dst + c * 1024;
        for (int i = 0; i < 1024; ++i) {
            d[i] = (static_cast<float>(s[i]) * (1.0f / 255.0f) - mean) * inv_std;
        }
    }
}

Tensor normalize(const Dataset& data, const NormalizeParams& p) {
    for (float s : p.std) {
        if (!(s > 0.0f)) throw ArgumentError("normalization std entries must be positive");
    }
    Tensor out({data.n(), 3, 32, 32});
    for (int64_t i = 0; i < data.n(); ++i) {
        normalize_image(data.image(i), out.data() + i * kImageBytes, p);
    }
    return out;
}

Dataset make_synthetic(int64_t n, uint64_t seed, int64_t num_classes, uint64_t id_base) {
    if (n <= 0 || num_classes <= 0 || num_classes > 255) {
        throw ArgumentError("synthetic dataset needs n > 0 and 1..255 classes");
    }
    Dataset out;
    for (int64_t c = 0; c < num_classes; ++c) out.classes.push_back("class_" + std::to_string(c));
    out.images.resize(static_cast<size_t>(n) * kImageBytes);
    out.labels.resize(static_cast<size_t>(n));

    constexpr float kTwoPi = 6.2831853f;
    // Base brightness per channel sits at the CIFAR normalization mean so the
    // normalized corpus is near zero-mean; labels cycle and the mirror bit
    // alternates every num_classes ids, keeping any contiguous slice exactly
    // class- and orientation-balanced. Everything except the phase jitter and
    // the pixel noise is a function of (class, mirror) alone, so the per-image
    // signal power is constant within a class and second-moment statistics
    // measured on disjoint class-balanced slices agree to sampling noise.
    // Amplitudes are kept small against the noise floor so that whitening
    // filters fitted on one slice stay slightly contractive on another.
    const float base[3] = {125.0f, 123.0f, 114.0f};
    constexpr float kDistract = 0.25f;
    // Half-integer frequencies: mirroring then negates the phase instead of
    // just the sign, so each orientation of an image is a genuinely distinct
    // pattern and orientation coverage carries information. Classes k and
    // k + C/2 share a frequency pair and a group phase; everything except the
    // row phase is keyed to the group, so partner classes differ only by a
    // pi shift of the row pattern. The per-image row-phase jitter is wide
    // enough that the two phase distributions overlap, which leaves an
    // irreducible confusion floor between partners no matter how long the
    // model trains.
    const int64_t half = (num_classes + 1) / 2;
    constexpr float kJitter = 1.7f;
    auto class_freq_y = [half](int64_t k) {
        return 1.5f + static_cast<float>((k % half) % 3);
    };
    auto class_freq_x = [half](int64_t k) {
        return 1.5f + static_cast<float>((k % half) / 3);
    };

    std::vector<float> row(32), col(32), row2(32), col2(32);
    for (int64_t i = 0; i < n; ++i) {
        uint64_t id = id_base + static_cast<uint64_t>(i);
        int64_t k = static_cast<int64_t>(id % static_cast<uint64_t>(num_classes));
        int64_t k2 = (k + 3) % num_classes;
        bool mirror = (id / static_cast<uint64_t>(num_classes)) % 2 == 1;
        out.labels[static_cast<size_t>(i)] = static_cast<int32_t>(k);
        RngStream rng(seed, RngPurpose::Synthetic, id);
        float jitter = rng.uniform(-kJitter, kJitter);

        float phase = kTwoPi * static_cast<float>(k) / static_cast<float>(num_classes);
        float phase2 = kTwoPi * static_cast<float>(k2) / static_cast<float>(num_classes);
        float grp = kTwoPi * static_cast<float>(k % half) / static_cast<float>(half);
        float grp2 = kTwoPi * static_cast<float>(k2 % half) / static_cast<float>(half);
        uint8_t* img = out.image(i);
        for (int c = 0; c < 3; ++c) {
            float fc = static_cast<float>(c);
            float color = 0.3f * std::sin(grp + 2.1f * fc);
            float tex_amp = 2.0f * (0.75f + 0.25f * std::sin(grp + kTwoPi * fc * 0.3f));
            for (int t = 0; t < 32; ++t) {
                float u = (static_cast<float>(t) + 0.5f) / 32.0f;
                row[static_cast<size_t>(t)] =
                    std::sin(kTwoPi * class_freq_y(k) * u + phase + jitter);
                col[static_cast<size_t>(t)] =
                    std::sin(kTwoPi * class_freq_x(k) * u + 0.7f * fc + 1.3f * grp);
                row2[static_cast<size_t>(t)] =
                    std::sin(kTwoPi * class_freq_y(k2) * u + phase2 + jitter);
                col2[static_cast<size_t>(t)] =
                    std::sin(kTwoPi * class_freq_x(k2) * u + 0.7f * fc + 1.3f * grp2);
            }
            for (int y = 0; y < 32; ++y) {
                for (int x = 0; x < 32; ++x) {
                    int sx = mirror ? 31 - x : x;
                    float tex = tex_amp * row[static_cast<size_t>(y)] *
                                col[static_cast<size_t>(sx)];
                    float tex2 = kDistract * tex_amp * row2[static_cast<size_t>(y)] *
                                 col2[static_cast<size_t>(sx)];
                    float noise = rng.uniform(-18.0f, 18.0f);
                    float v = base[c] + color + tex + tex2 + noise;
                    long b = std::lround(v);
                    img[(c * 32 + y) * 32 + x] =
                        static_cast<uint8_t>(std::clamp(b, 0L, 255L));
                }
            }
        }
    }
    return out;
}

} // namespace airbench
