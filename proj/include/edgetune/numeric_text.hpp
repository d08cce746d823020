#pragma once

// Locale-independent number formatting and strict parsing shared by every
// text format in the project.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgetune {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Fixed-point rendering with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Whole string must be a finite number; leading/trailing blanks allowed.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char sep);

/// Splits a stream's content into lines; a trailing '\r' is dropped.
std::vector<std::string> read_lines(std::istream& in);

}  // namespace edgetune
