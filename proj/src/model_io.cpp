#include "prunekit/model_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "prunekit/errors.hpp"

namespace prunekit {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::dense: return "dense";
        case Variant::sparse: return "sparse";
        case Variant::quantized: return "quantized";
    }
    return "?";
}

std::string_view to_string(DType d) {
    switch (d) {
        case DType::f32: return "f32";
        case DType::f32_sparse: return "f32-sparse";
        case DType::q8: return "q8";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Quantization

float QuantizedTensor::dequantize(std::uint8_t code) const {
    return static_cast<float>(static_cast<double>(scale) * (int(code) - int(zero_point)));
}

QuantizedTensor quantize(const Tensor& t) {
    if (!t.all_finite()) throw NumericError("quantize: tensor has non-finite values");
    float lo = 0.0f, hi = 0.0f;
    for (float v : t.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    QuantizedTensor q;
    q.shape = t.shape();
    q.scale = hi == lo ? 1.0f : static_cast<float>((double(hi) - double(lo)) / 255.0);
    if (!(q.scale > 0.0f)) q.scale = std::numeric_limits<float>::min();
    const double scale = q.scale;
    const double zp = std::clamp(std::round(-double(lo) / scale), 0.0, 255.0);
    q.zero_point = static_cast<std::uint8_t>(zp);
    q.codes.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double code = std::clamp(std::round(double(t[i]) / scale) + zp, 0.0, 255.0);
        q.codes[i] = static_cast<std::uint8_t>(code);
    }
    return q;
}

QuantizedModel quantize(const Model& model) {
    QuantizedModel q;
    for (const auto& l : model.layers) q.layers.push_back({l.spec, quantize(l.weight), quantize(l.bias)});
    return q;
}

Tensor dequantize(const QuantizedTensor& q) {
    std::vector<float> data(q.codes.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = q.dequantize(q.codes[i]);
    return Tensor(q.shape, std::move(data));
}

Model dequantize(const QuantizedModel& q) {
    Model m;
    for (const auto& l : q.layers) m.layers.push_back({l.spec, dequantize(l.weight), dequantize(l.bias)});
    return m;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) u8(static_cast<std::uint8_t>(v >> s));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void str(std::string_view s) {
        if (s.size() > 0xFFFF) throw ConfigError("layer name too long");
        u16(static_cast<std::uint16_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

std::uint8_t layer_flags(const LayerSpec& s) {
    return static_cast<std::uint8_t>((s.activation == Activation::relu ? 1 : 0) | (s.prunable ? 2 : 0));
}

void header(Writer& w, std::size_t layer_count) {
    if (layer_count == 0 || layer_count > 0xFFFF) throw ConfigError("model layer count out of range");
    w.bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("PMK1"), 4));
    w.u16(kFormatVersion);
    w.u16(static_cast<std::uint16_t>(layer_count));
}

void layer_header(Writer& w, const LayerSpec& spec, DType dtype, const std::vector<std::size_t>& shape) {
    w.str(spec.name);
    w.u8(layer_flags(spec));
    w.u8(static_cast<std::uint8_t>(dtype));
    w.u8(static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) w.u32(static_cast<std::uint32_t>(d));
}

void dense_values(Writer& w, const Tensor& t) {
    for (float v : t.values()) w.f32(v);
}

void sparse_values(Writer& w, const Tensor& t) {
    Bytes bitmap((t.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0.0f || std::signbit(t[i])) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    w.bytes(bitmap);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (bitmap[i / 8] & (1u << (i % 8))) w.f32(t[i]);
}

void q8_values(Writer& w, const QuantizedTensor& q) {
    w.f32(q.scale);
    w.u8(q.zero_point);
    w.bytes(q.codes);
}

}  // namespace

Bytes serialize_dense(const Model& model) {
    Writer w;
    header(w, model.layers.size());
    for (const auto& l : model.layers) {
        layer_header(w, l.spec, DType::f32, l.weight.shape());
        dense_values(w, l.weight);
        dense_values(w, l.bias);
    }
    return w.take();
}

Bytes serialize_sparse(const Model& model) {
    Writer w;
    header(w, model.layers.size());
    for (const auto& l : model.layers) {
        const double zero_fraction =
            static_cast<double>(l.weight.count_zeros()) / static_cast<double>(l.weight.size());
        const bool sparse = zero_fraction >= kSparseEncodeThreshold;
        layer_header(w, l.spec, sparse ? DType::f32_sparse : DType::f32, l.weight.shape());
        if (sparse)
            sparse_values(w, l.weight);
        else
            dense_values(w, l.weight);
        dense_values(w, l.bias);
    }
    return w.take();
}

Bytes serialize_quantized(const QuantizedModel& model) {
    Writer w;
    header(w, model.layers.size());
    for (const auto& l : model.layers) {
        layer_header(w, l.spec, DType::q8, l.weight.shape);
        q8_values(w, l.weight);
        q8_values(w, l.bias);
    }
    return w.take();
}

// ---------------------------------------------------------------------------
// Reader

namespace {

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return b_.size() - pos_; }
    bool at_end() const { return pos_ == b_.size(); }

    void need(std::size_t n, const std::string& what) const {
        if (remaining() < n) throw FormatError(pos_, "truncated " + what);
    }
    std::uint8_t u8(const std::string& what) {
        need(1, what);
        return b_[pos_++];
    }
    std::uint16_t u16(const std::string& what) {
        need(2, what);
        const std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32(const std::string& what) { return std::bit_cast<float>(u32(what)); }
    std::span<const std::uint8_t> bytes(std::size_t n, const std::string& what) {
        need(n, what);
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

struct RawLayer {
    LayerSpec spec;
    DType dtype = DType::f32;
    Tensor weight, bias;           // f32 / f32 sparse
    QuantizedTensor qweight, qbias;  // q8
};

void read_f32s(Reader& r, float* out, std::size_t n, const std::string& what) {
    r.need(4 * n, what);
    for (std::size_t i = 0; i < n; ++i) out[i] = r.f32(what);
}

QuantizedTensor read_q8(Reader& r, std::vector<std::size_t> shape, const std::string& what) {
    QuantizedTensor q;
    q.shape = std::move(shape);
    const std::size_t at = r.pos();
    q.scale = r.f32(what + " scale");
    if (!std::isfinite(q.scale) || !(q.scale > 0.0f)) throw FormatError(at, what + " has invalid scale");
    q.zero_point = r.u8(what + " zero point");
    const auto codes = r.bytes(shape_product(q.shape), what + " codes");
    q.codes.assign(codes.begin(), codes.end());
    return q;
}

RawLayer read_layer(Reader& r, std::size_t index) {
    RawLayer l;
    const std::string ctx = "layer " + std::to_string(index);
    const std::uint16_t name_len = r.u16(ctx + " name length");
    const auto name = r.bytes(name_len, ctx + " name");
    l.spec.name.assign(name.begin(), name.end());
    const std::string where = "layer '" + l.spec.name + "'";
    if (l.spec.name.empty()) throw FormatError(r.pos(), ctx + " has an empty name");

    const std::size_t flags_at = r.pos();
    const std::uint8_t flags = r.u8(where + " flags");
    if (flags & ~0x3u) throw FormatError(flags_at, where + " has unknown flag bits");
    l.spec.activation = (flags & 1) ? Activation::relu : Activation::identity;
    l.spec.prunable = (flags & 2) != 0;

    const std::size_t dtype_at = r.pos();
    const std::uint8_t dtype = r.u8(where + " dtype");
    if (dtype > 2) throw FormatError(dtype_at, where + " has unknown dtype " + std::to_string(dtype));
    l.dtype = static_cast<DType>(dtype);

    const std::size_t rank_at = r.pos();
    const std::uint8_t rank = r.u8(where + " rank");
    if (rank != 2) throw FormatError(rank_at, where + " weight rank must be 2, got " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) {
        const std::size_t at = r.pos();
        d = r.u32(where + " dims");
        if (d == 0) throw FormatError(at, where + " has a zero dimension");
    }
    l.spec.out_dim = shape[0];
    l.spec.in_dim = shape[1];
    // Guard against absurd sizes before allocating.
    const std::size_t n = shape[0] * shape[1];
    if (shape[0] > r.remaining() || shape[1] > r.remaining() || (n + 7) / 8 > r.remaining())
        throw FormatError(r.pos(), "truncated " + where + " weights");

    switch (l.dtype) {
        case DType::f32: {
            r.need(4 * n, where + " weights");
            l.weight = Tensor(shape);
            read_f32s(r, l.weight.data(), n, where + " weights");
            break;
        }
        case DType::f32_sparse: {
            const auto bitmap = r.bytes((n + 7) / 8, where + " presence bitmap");
            if (n % 8 && (bitmap.back() >> (n % 8)))
                throw FormatError(r.pos() - 1, where + " bitmap padding bits are set");
            std::size_t k = 0;
            for (std::uint8_t b : bitmap) k += static_cast<std::size_t>(std::popcount(b));
            r.need(4 * k, where + " sparse values");
            l.weight = Tensor(shape);
            for (std::size_t i = 0; i < n; ++i)
                if (bitmap[i / 8] & (1u << (i % 8))) l.weight[i] = r.f32(where + " sparse values");
            break;
        }
        case DType::q8:
            l.qweight = read_q8(r, shape, where + " weights");
            break;
    }
    if (l.dtype == DType::q8) {
        l.qbias = read_q8(r, {shape[0]}, where + " bias");
    } else {
        r.need(4 * shape[0], where + " bias");
        l.bias = Tensor({shape[0]});
        read_f32s(r, l.bias.data(), shape[0], where + " bias");
    }
    return l;
}

}  // namespace

namespace {

std::vector<RawLayer> parse(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.bytes(std::min<std::size_t>(4, bytes.size()), "magic");
    if (magic.size() != 4 || std::memcmp(magic.data(), "PMK1", 4) != 0) throw FormatError(0, "bad magic");
    const std::uint16_t version = r.u16("version");
    if (version != kFormatVersion) throw FormatError(4, "unsupported version " + std::to_string(version));
    const std::uint16_t count = r.u16("layer count");
    if (count == 0) throw FormatError(6, "model has no layers");

    std::vector<RawLayer> layers;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < count; ++i) {
        starts.push_back(r.pos());
        layers.push_back(read_layer(r, i));
    }
    if (!r.at_end()) throw FormatError(r.pos(), std::to_string(r.remaining()) + " trailing bytes");

    const bool quantized = layers.front().dtype == DType::q8;
    std::vector<LayerSpec> specs;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if ((layers[i].dtype == DType::q8) != quantized)
            throw FormatError(starts[i], "layer '" + layers[i].spec.name + "' mixes q8 with float layers");
        specs.push_back(layers[i].spec);
    }
    try {
        validate_specs(specs);
    } catch (const ConfigError& e) {
        throw FormatError(8, std::string("invalid layer stack: ") + e.what());
    }
    return layers;
}

}  // namespace

LoadedModel load(std::span<const std::uint8_t> bytes) {
    std::vector<RawLayer> layers = parse(bytes);
    if (layers.front().dtype == DType::q8) {
        QuantizedModel q;
        for (auto& l : layers) q.layers.push_back({l.spec, std::move(l.qweight), std::move(l.qbias)});
        return q;
    }
    Model m;
    for (auto& l : layers) m.layers.push_back({l.spec, std::move(l.weight), std::move(l.bias)});
    return m;
}

Model load_as_model(std::span<const std::uint8_t> bytes) {
    LoadedModel loaded = load(bytes);
    if (auto* q = std::get_if<QuantizedModel>(&loaded)) return dequantize(*q);
    return std::get<Model>(std::move(loaded));
}

// ---------------------------------------------------------------------------
// gzip

Bytes gzip_compress(std::span<const std::uint8_t> payload) {
    z_stream zs{};
    if (deflateInit2(&zs, 9, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    gz_header header{};  // mtime 0, no name/comment
    header.os = 3;
    deflateSetHeader(&zs, &header);

    Bytes out(deflateBound(&zs, static_cast<uLong>(payload.size())) + 32);
    zs.next_in = const_cast<Bytef*>(payload.data());
    zs.avail_in = static_cast<uInt>(payload.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t written = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate did not finish");
    out.resize(written);
    return out;
}

std::size_t gzip_size(std::span<const std::uint8_t> payload) { return gzip_compress(payload).size(); }

Bytes gunzip(std::span<const std::uint8_t> stream) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error("inflateInit2 failed");
    Bytes out;
    std::uint8_t buf[1 << 14];
    zs.next_in = const_cast<Bytef*>(stream.data());
    zs.avail_in = static_cast<uInt>(stream.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError(zs.total_in, "corrupt gzip stream");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw FormatError(zs.total_in, "truncated gzip stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

ModelArtifact make_artifact(Variant variant, Bytes payload) {
    ModelArtifact a;
    a.variant = variant;
    a.raw_size = payload.size();
    a.gzip_size = gzip_size(payload);
    a.payload = std::move(payload);
    return a;
}

// ---------------------------------------------------------------------------
// Inspection

double ArtifactInfo::global_zero_fraction() const {
    std::size_t zeros = 0, total = 0;
    for (const auto& l : layers) {
        if (!l.prunable) continue;
        zeros += l.weight_zeros;
        total += shape_product(l.shape);
    }
    return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

ArtifactInfo inspect(std::span<const std::uint8_t> bytes) {
    const std::vector<RawLayer> layers = parse(bytes);
    ArtifactInfo info;
    info.raw_size = bytes.size();
    info.gzip_size = gzip_size(bytes);
    info.variant = Variant::dense;
    for (const auto& l : layers) {
        LayerInfo li;
        li.name = l.spec.name;
        li.dtype = l.dtype;
        li.shape = {l.spec.out_dim, l.spec.in_dim};
        li.prunable = l.spec.prunable;
        li.activation = l.spec.activation;
        if (l.dtype == DType::q8) {
            info.variant = Variant::quantized;
            li.weight_zeros = static_cast<std::size_t>(
                std::count(l.qweight.codes.begin(), l.qweight.codes.end(), l.qweight.zero_point));
            li.scale = l.qweight.scale;
            li.zero_point = l.qweight.zero_point;
        } else {
            if (l.dtype == DType::f32_sparse) info.variant = Variant::sparse;
            li.weight_zeros = l.weight.count_zeros();
        }
        li.zero_fraction = static_cast<double>(li.weight_zeros) / static_cast<double>(shape_product(li.shape));
        info.layers.push_back(std::move(li));
    }
    return info;
}

// ---------------------------------------------------------------------------
// Files

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path.string() + "'");
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw UsageError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                          text.size()));
}

}  // namespace prunekit
