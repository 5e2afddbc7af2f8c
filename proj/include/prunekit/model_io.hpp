#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prunekit/nn.hpp"

namespace prunekit {

using Bytes = std::vector<std::uint8_t>;

// .pmk container
//
//   "PMK1" | version u16 | layer count u16
//   per layer:
//     name length u16 | UTF-8 name | flags u8 | dtype u8 | rank u8 | dims u32 x rank
//     weight payload | bias payload
//
// All integers and floats little-endian. flags: bit 0 = relu activation,
// bit 1 = prunable. Weights are rank 2 [out x in]; the bias has dims[0] entries.
//
// dtype 0 (f32):        weight f32 x n              | bias f32 x out
// dtype 1 (f32 sparse): bitmap ceil(n/8) bytes, bit i (LSB first) set when
//                       entry i is not +0.0, then those f32 values in
//                       row-major order           | bias f32 x out
// dtype 2 (q8):         scale f32, zero_point u8, codes u8 x n
//                                                 | bias: scale f32, zero_point u8, codes u8 x out
inline constexpr std::uint16_t kFormatVersion = 1;

enum class DType : std::uint8_t { f32 = 0, f32_sparse = 1, q8 = 2 };

enum class Variant { dense, sparse, quantized };

std::string_view to_string(Variant v);
std::string_view to_string(DType d);

// Weight tensors with at least this fraction of zeros use the sparse encoding.
inline constexpr double kSparseEncodeThreshold = 0.25;

/// Per-tensor asymmetric affine 8-bit code: value = scale * (code - zero_point).
struct QuantizedTensor {
    std::vector<std::size_t> shape;
    float scale = 1.0f;
    std::uint8_t zero_point = 0;
    std::vector<std::uint8_t> codes;

    float dequantize(std::uint8_t code) const;
    friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

struct QuantizedLayer {
    LayerSpec spec;
    QuantizedTensor weight;
    QuantizedTensor bias;

    friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

struct QuantizedModel {
    std::vector<QuantizedLayer> layers;

    friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

/// Range is [min(0, min w), max(0, max w)], so 0.0 always maps exactly to the
/// zero point. Throws NumericError on non-finite input.
QuantizedTensor quantize(const Tensor& t);
QuantizedModel quantize(const Model& model);

Tensor dequantize(const QuantizedTensor& q);
Model dequantize(const QuantizedModel& q);

Bytes serialize_dense(const Model& model);
Bytes serialize_sparse(const Model& model);
Bytes serialize_quantized(const QuantizedModel& model);

using LoadedModel = std::variant<Model, QuantizedModel>;

/// Inverse of the serializers. Throws FormatError with the failing byte offset.
LoadedModel load(std::span<const std::uint8_t> bytes);

/// Loads any variant as a float model (quantized files are dequantized).
Model load_as_model(std::span<const std::uint8_t> bytes);

/// gzip (RFC 1952) stream from zlib: level 9, 32 KiB window (windowBits 15+16),
/// memLevel 8, default strategy, no file name, mtime 0.
Bytes gzip_compress(std::span<const std::uint8_t> payload);
std::size_t gzip_size(std::span<const std::uint8_t> payload);
Bytes gunzip(std::span<const std::uint8_t> stream);

struct ModelArtifact {
    Variant variant = Variant::dense;
    Bytes payload;
    std::size_t raw_size = 0;
    std::size_t gzip_size = 0;
};

ModelArtifact make_artifact(Variant variant, Bytes payload);

struct LayerInfo {
    std::string name;
    DType dtype = DType::f32;
    std::vector<std::size_t> shape;
    bool prunable = true;
    Activation activation = Activation::identity;
    double zero_fraction = 0.0;  // of the decoded weight tensor
    std::size_t weight_zeros = 0;
    float scale = 0.0f;          // q8 only
    int zero_point = 0;          // q8 only
};

struct ArtifactInfo {
    Variant variant = Variant::dense;
    std::vector<LayerInfo> layers;
    std::size_t raw_size = 0;
    std::size_t gzip_size = 0;

    double global_zero_fraction() const;
};

ArtifactInfo inspect(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace prunekit
