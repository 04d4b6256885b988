#include "dnlg/model/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "dnlg/errors.hpp"
#include "dnlg/util/file_io.hpp"

namespace dnlg {

namespace {

constexpr std::string_view kMagic = "DNLGCKPT";

class Writer {
public:
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void raw(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }

private:
    void le(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
    double f64() { return std::bit_cast<double>(le(8)); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string raw(std::size_t n) {
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw DataError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    std::uint64_t le(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }

    const std::string& in_;
    std::size_t pos_ = 0;
};

std::map<std::string, std::int64_t> dims_fields(const Dims& d) {
    return {{"vocab_src", d.vocab_src},       {"vocab_tgt", d.vocab_tgt},
            {"embed", d.embed},               {"hidden", d.hidden},
            {"attn_hidden", d.attn_hidden},   {"out_hidden", d.out_hidden},
            {"split_embedding", d.split_embedding}, {"vocab_slot", d.vocab_slot},
            {"tie_embeddings", d.tie_embeddings}};
}

Dims dims_from_fields(const std::map<std::string, std::int64_t>& f) {
    auto get = [&](const char* key) {
        auto it = f.find(key);
        if (it == f.end()) throw DataError(std::string("checkpoint is missing dimension '") + key + "'");
        return static_cast<int>(it->second);
    };
    Dims d;
    d.vocab_src = get("vocab_src");
    d.vocab_tgt = get("vocab_tgt");
    d.embed = get("embed");
    d.hidden = get("hidden");
    d.attn_hidden = get("attn_hidden");
    d.out_hidden = get("out_hidden");
    d.split_embedding = get("split_embedding") != 0;
    d.vocab_slot = get("vocab_slot");
    d.tie_embeddings = get("tie_embeddings") != 0;
    return d;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.raw(kMagic);
    w.u32(Checkpoint::kVersion);

    const auto fields = dims_fields(ckpt.params.dims);
    w.u32(static_cast<std::uint32_t>(fields.size()));
    for (const auto& [k, v] : fields) {
        w.str(k);
        w.i64(v);
    }

    w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
    for (const auto& [k, v] : ckpt.metadata) {
        w.str(k);
        w.str(v);
    }

    std::uint32_t n_tensors = 0;
    ckpt.params.for_each_tensor([&](std::string_view, const auto&) { ++n_tensors; });
    w.u32(n_tensors);
    ckpt.params.for_each_tensor([&](std::string_view name, const auto& t) {
        w.str(name);
        w.u64(static_cast<std::uint64_t>(t.rows()));
        w.u64(static_cast<std::uint64_t>(t.cols()));
        for (Eigen::Index i = 0; i < t.rows(); ++i)
            for (Eigen::Index j = 0; j < t.cols(); ++j) w.f64(t(i, j));
    });
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    if (r.raw(kMagic.size()) != kMagic) throw DataError("not a checkpoint file (bad magic)");
    const auto version = r.u32();
    if (version != Checkpoint::kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));

    std::map<std::string, std::int64_t> fields;
    for (auto n = r.u32(); n > 0; --n) {
        auto key = r.str();
        fields[key] = r.i64();
    }

    Checkpoint ckpt;
    for (auto n = r.u32(); n > 0; --n) {
        auto key = r.str();
        ckpt.metadata[key] = r.str();
    }

    ckpt.params.dims = dims_from_fields(fields);
    ckpt.params.dims.validate();

    std::map<std::string, Matrix> tensors;
    for (auto n = r.u32(); n > 0; --n) {
        auto name = r.str();
        const auto rows = static_cast<Eigen::Index>(r.u64());
        const auto cols = static_cast<Eigen::Index>(r.u64());
        if (rows < 0 || cols < 0 || static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) > bytes.size())
            throw DataError("checkpoint tensor '" + name + "' has an implausible shape");
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
        tensors.emplace(std::move(name), std::move(m));
    }
    if (!r.done()) throw DataError("trailing bytes after checkpoint tensors");

    // Shapes must agree with a freshly shaped model of the same dims.
    const auto shape = zeros_like(init_params(ckpt.params.dims, 0));
    zip_tensors(ckpt.params, shape, [&](std::string_view name, auto& dst, const auto& ref) {
        auto it = tensors.find(std::string(name));
        if (it == tensors.end()) throw DataError("checkpoint is missing tensor '" + std::string(name) + "'");
        if (it->second.rows() != ref.rows() || it->second.cols() != ref.cols())
            throw DataError("checkpoint tensor '" + std::string(name) + "' has the wrong shape");
        dst = it->second;
        tensors.erase(it);
    });
    if (!tensors.empty()) throw DataError("checkpoint has unknown tensor '" + tensors.begin()->first + "'");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    try {
        return deserialize_checkpoint(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace dnlg
