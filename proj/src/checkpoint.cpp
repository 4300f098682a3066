#include "ddai/nn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ddai::nn {
namespace {

constexpr char kMagic[8] = {'D', 'D', 'A', 'I', 'C', 'K', 'P', 'T'};

template <class T>
T to_little(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return value;
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <class T>
    void put(T value) {
        value = to_little(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

private:
    std::ostream& out_;
};

class Reader {
public:
    Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    template <class T>
    T get() {
        T value;
        bytes(&value, sizeof(T));
        return to_little(value);
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw ParseError(0, "", "truncated checkpoint: " + source_);
    }

private:
    std::istream& in_;
    std::string source_;
};

struct RunningView {
    const char* name;
    Vector<float>* values;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LstmClassifier<float>& model,
                     std::uint64_t vocab_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    Writer w(out);
    const auto& cfg = model.config;
    w.bytes(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(cfg.input_dim));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(cfg.hidden_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.num_layers));
    w.put<double>(cfg.dropout_p);
    w.put<double>(cfg.bn_momentum);
    w.put<double>(cfg.bn_eps);
    w.put<std::uint64_t>(vocab_hash);

    auto tensors = model.params.tensors();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size() + 2));
    auto put_array = [&w](const std::string& name, const float* data, Index n) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
        w.bytes(name.data(), name.size());
        w.put<std::uint64_t>(static_cast<std::uint64_t>(n));
        for (Index i = 0; i < n; ++i) w.put<float>(data[i]);
    };
    for (const auto& t : tensors) put_array(t.name, t.values.data(), t.values.size());
    put_array("bn.running_mean", model.bn_running.mean.data(), model.bn_running.mean.size());
    put_array("bn.running_var", model.bn_running.var.data(), model.bn_running.var.size());
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_vocab_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Reader r(in, path.string());
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw ParseError(0, "magic", "not a checkpoint file: " + path.string());
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CompatibilityError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    cfg.input_dim = static_cast<Index>(r.get<std::uint64_t>());
    cfg.hidden_dim = static_cast<Index>(r.get<std::uint64_t>());
    cfg.num_layers = static_cast<Index>(r.get<std::uint32_t>());
    cfg.dropout_p = r.get<double>();
    cfg.bn_momentum = r.get<double>();
    cfg.bn_eps = r.get<double>();
    const auto vocab_hash = r.get<std::uint64_t>();
    if (expected_vocab_hash && *expected_vocab_hash != vocab_hash) {
        std::ostringstream msg;
        msg << "checkpoint was trained with vocabulary hash " << std::hex << vocab_hash
            << ", got vocabulary with hash " << *expected_vocab_hash;
        throw CompatibilityError(msg.str());
    }

    Checkpoint ckpt{LstmClassifier<float>::zeros(cfg), vocab_hash};
    auto tensors = ckpt.model.params.tensors();
    std::vector<NamedTensor<float>> slots = tensors;
    slots.push_back({"bn.running_mean", Eigen::Map<Vector<float>>(ckpt.model.bn_running.mean.data(),
                                                                  ckpt.model.bn_running.mean.size())});
    slots.push_back({"bn.running_var", Eigen::Map<Vector<float>>(ckpt.model.bn_running.var.data(),
                                                                 ckpt.model.bn_running.var.size())});

    const auto count = r.get<std::uint32_t>();
    if (count != slots.size())
        throw CompatibilityError("checkpoint has " + std::to_string(count) + " arrays, expected " +
                                 std::to_string(slots.size()));
    for (auto& slot : slots) {
        const auto name_len = r.get<std::uint32_t>();
        if (name_len > 256) throw ParseError(0, "name", "corrupt checkpoint array name");
        std::string name(name_len, '\0');
        r.bytes(name.data(), name_len);
        const auto n = r.get<std::uint64_t>();
        if (name != slot.name || n != static_cast<std::uint64_t>(slot.values.size()))
            throw CompatibilityError("checkpoint array " + name + " (" + std::to_string(n) +
                                     ") does not match expected " + slot.name + " (" +
                                     std::to_string(slot.values.size()) + ")");
        for (Index i = 0; i < slot.values.size(); ++i) slot.values(i) = r.get<float>();
    }
    if ((ckpt.model.bn_running.var.array() < 0.0f).any())
        throw ParseError(0, "bn.running_var", "negative running variance in checkpoint");
    return ckpt;
}

}  // namespace ddai::nn
