#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ddai/nn/model.hpp"

namespace ddai::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    LstmClassifier<float> model;
    std::uint64_t vocab_hash = 0;
};

/// Binary layout, all integers and floats little-endian:
///   "DDAICKPT" | u32 version | u64 input_dim | u64 hidden_dim | u32 num_layers
///   | f64 dropout_p | f64 bn_momentum | f64 bn_eps | u64 vocab_hash | u32 n_arrays
///   then per array: u32 name_len | name | u64 count | count x f32
void save_checkpoint(const std::filesystem::path& path, const LstmClassifier<float>& model,
                     std::uint64_t vocab_hash);

/// Verifies magic, version and every array's name and size. When
/// `expected_vocab_hash` is given a mismatch raises CompatibilityError.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_vocab_hash = std::nullopt);

}  // namespace ddai::nn
