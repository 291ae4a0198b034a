#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace qsn {

/// Writes to `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace qsn
