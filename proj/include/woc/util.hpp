#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace woc {

// Shortest round-trip decimal form of v ("62", "25.681", "1e+308").
// Used everywhere a double lands in a CSV/JSONL/SVG so that identical
// values always serialize to identical bytes.
std::string format_double(double v);

// Fixed-point with `digits` decimals, for display-oriented output.
std::string format_fixed(double v, int digits);

std::string to_lower(std::string_view s);

// Byte offset of the last case-insensitive occurrence of `needle`,
// or npos. ASCII case folding only.
std::size_t ifind_last(std::string_view haystack, std::string_view needle);

bool iends_with(std::string_view s, std::string_view suffix);

std::string trim(std::string_view s);

// RFC3339 UTC timestamp of the current wall clock.
std::string utc_timestamp_now();

// Minimal CSV quoting: wraps fields containing comma/quote/newline.
std::string csv_field(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

} // namespace woc
