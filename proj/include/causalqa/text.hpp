#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace causalqa {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Levenshtein distance divided by the longer length; 0 for two empty strings.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Lowercases and joins whitespace-separated words with underscores.
std::string to_snake(std::string_view phrase);

// Formats with exactly two decimals; never prints "-0.00".
std::string format_fixed2(double value);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a sibling temp file and rename so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace causalqa
