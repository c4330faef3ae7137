#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rasg {

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

// Writes into a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// Shortest round-trippable decimal form ("%.17g" trimmed).
std::string format_double(double v);

std::string iso8601_now();

}  // namespace rasg
