#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dnlg {

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string hex64(std::uint64_t value);
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace dnlg
