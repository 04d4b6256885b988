#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "dnlg/model/model.hpp"

namespace dnlg {

// Binary checkpoint, all integers and doubles little-endian:
//
//   "DNLGCKPT" | u32 version
//   u32 n_dims     | n x (str name, i64 value)
//   u32 n_metadata | n x (str key, str value)      e.g. vocabulary hashes
//   u32 n_tensors  | n x (str name, u64 rows, u64 cols, rows*cols f64 row-major)
//
// where str = u32 byte length followed by UTF-8 bytes.
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    ModelParams params;
    std::map<std::string, std::string> metadata;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dnlg
