#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace monitor {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view s);

std::string read_file(const std::filesystem::path& path);
/// Writes via a sibling temp file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace monitor
