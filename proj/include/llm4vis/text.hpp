#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace llm4vis::text {

/// Decodes UTF-8 into code points. Invalid bytes decode to themselves so the
/// function is total.
std::u32string utf8_decode(std::string_view s);

std::size_t utf8_length(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Whitespace-split lowercase tokens.
std::vector<std::string> words(std::string_view s);

/// Levenshtein distance over code points (unit insert/delete/substitute).
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Shortest decimal text that round-trips to the same double.
std::string format_shortest(double v);

/// Up to six significant digits, always with a decimal point or exponent
/// ("0.0", "800.0", "0.123457", "1e-07").
std::string format_sig6(double v);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace llm4vis::text
