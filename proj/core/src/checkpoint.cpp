#include "bfuse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

constexpr char kMagic[4] = {'B', 'F', 'U', 'S'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

struct Reader {
    const std::uint8_t* p;
    std::size_t left;

    void take(void* dst, std::size_t n) {
        if (n > left) throw IoError("checkpoint truncated");
        std::memcpy(dst, p, n);
        p += n;
        left -= n;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        std::uint8_t b[4];
        take(b, 4);
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        std::uint8_t b[8];
        take(b, 8);
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    }
    std::string str(std::size_t n) {
        std::string s(n, '\0');
        take(s.data(), n);
        return s;
    }
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p.value;
    }
    return nullptr;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, ckpt.version);
    put_u64(out, ckpt.arch_json.size());
    out.insert(out.end(), ckpt.arch_json.begin(), ckpt.arch_json.end());
    put_u32(out, static_cast<std::uint32_t>(ckpt.params.size()));
    for (const auto& p : ckpt.params) {
        put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.insert(out.end(), p.name.begin(), p.name.end());
        put_u32(out, static_cast<std::uint32_t>(p.value.rank()));
        for (std::size_t d : p.value.shape()) put_u64(out, d);
        const auto* bytes = reinterpret_cast<const std::uint8_t*>(p.value.data());
        out.insert(out.end(), bytes, bytes + p.value.size() * sizeof(double));
    }
    return out;
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes.data(), bytes.size()};
    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not a checkpoint file (bad magic)");
    }
    Checkpoint ckpt;
    ckpt.version = r.u32();
    if (ckpt.version != 1) {
        throw IoError("unsupported checkpoint format version " + std::to_string(ckpt.version));
    }
    const std::uint64_t arch_len = r.u64();
    ckpt.arch_json = r.str(arch_len);
    const std::uint32_t n_params = r.u32();
    ckpt.params.reserve(n_params);
    for (std::uint32_t i = 0; i < n_params; ++i) {
        ParamRecord rec;
        rec.name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
        const std::size_t count = shape_product(shape);
        std::vector<double> data(count);
        r.take(data.data(), count * sizeof(double));
        rec.value = Tensor(std::move(shape), std::move(data));
        ckpt.params.push_back(std::move(rec));
    }
    if (r.left != 0) throw IoError("checkpoint has trailing bytes");
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

Checkpoint checkpoint_from_graph(const ModelGraph& g, std::string arch_json) {
    Checkpoint ckpt;
    ckpt.arch_json = std::move(arch_json);
    for (const auto& name : g.param_names()) {
        ckpt.params.push_back({name, g.param(name)});
    }
    return ckpt;
}

void load_params_into(ModelGraph& g, const Checkpoint& ckpt, bool allow_missing) {
    std::size_t matched = 0;
    for (const auto& rec : ckpt.params) {
        if (!g.has_param(rec.name)) {
            throw StructuralError("checkpoint parameter has no graph counterpart: " + rec.name);
        }
        Tensor& dst = g.param(rec.name);
        if (!dst.same_shape(rec.value)) {
            throw StructuralError("checkpoint parameter shape mismatch: " + rec.name);
        }
        dst = rec.value;
        ++matched;
    }
    if (!allow_missing && matched != g.param_names().size()) {
        throw StructuralError("checkpoint is missing parameters for this graph");
    }
}

}  // namespace bfuse
