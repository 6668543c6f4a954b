#include "airbench/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace airbench {

int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0f) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != static_cast<int64_t>(data_.size()))
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
}

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

namespace {

int64_t flat_offset(const std::vector<int64_t>& shape, std::initializer_list<int64_t> idx) {
    if (idx.size() != shape.size())
        throw ShapeError("index rank " + std::to_string(idx.size()) +
                         " vs tensor rank " + std::to_string(shape.size()));
    int64_t off = 0;
    size_t i = 0;
    for (int64_t v : idx) {
        if (v < 0 || v >= shape[i])
            throw ShapeError("index out of range in dim " + std::to_string(i));
        off = off * shape[i] + v;
        ++i;
    }
    return off;
}

} // namespace

float& Tensor::at(std::initializer_list<int64_t> idx) {
    return data_[static_cast<size_t>(flat_offset(shape_, idx))];
}

float Tensor::at(std::initializer_list<int64_t> idx) const {
    return data_[static_cast<size_t>(flat_offset(shape_, idx))];
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::reshaped(std::vector<int64_t> shape) const {
    if (shape_numel(shape) != numel())
        throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(shape) +
                         " changes element count");
    return Tensor(std::move(shape), data_);
}

namespace {

constexpr char kMagic[4] = {'A', 'B', 'T', '1'};

void put_u16(std::ostream& os, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

void put_u32(std::ostream& os, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

// f32 payloads are written little-endian regardless of host order.
constexpr bool kLittleEndian = std::endian::native == std::endian::little;

} // namespace

void save_tensor_archive(const std::string& path, const NamedTensors& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        if (name.size() > 0xffff) throw ArgumentError("tensor name too long: " + name);
        if (t.rank() > 255) throw ArgumentError("tensor rank too large");
        put_u16(os, static_cast<uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(t.rank()));
        for (int64_t d : t.shape()) put_u64(os, static_cast<uint64_t>(d));
        if constexpr (kLittleEndian) {
            os.write(reinterpret_cast<const char*>(t.data()),
                     static_cast<std::streamsize>(t.numel()) * 4);
        } else {
            for (int64_t i = 0; i < t.numel(); ++i) {
                uint32_t bits;
                std::memcpy(&bits, t.data() + i, 4);
                put_u32(os, bits);
            }
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

NamedTensors load_tensor_archive(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a tensor archive (bad magic): " + path);
    uint32_t count = get_u32(is);
    NamedTensors out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = get_u16(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        int rank = is.get();
        if (rank < 0) throw IoError("truncated archive: " + path);
        std::vector<int64_t> shape(static_cast<size_t>(rank));
        for (auto& d : shape) d = static_cast<int64_t>(get_u64(is));
        Tensor t(shape);
        if constexpr (kLittleEndian) {
            is.read(reinterpret_cast<char*>(t.data()),
                    static_cast<std::streamsize>(t.numel()) * 4);
        } else {
            for (int64_t j = 0; j < t.numel(); ++j) {
                uint32_t bits = get_u32(is);
                std::memcpy(t.data() + j, &bits, 4);
            }
        }
        if (!is) throw IoError("truncated archive: " + path);
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

} // namespace airbench
