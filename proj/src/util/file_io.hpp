#pragma once

#include <filesystem>
#include <string>

namespace deepsound::util {

/// Whole-file read; throws Error(io) when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Truncating binary write, creating parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace deepsound::util
