#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zlab::textio {

// Shortest representation that parses back to the same double.
std::string format_double(double v);
void append_double(std::string& out, double v);
void append_int(std::string& out, std::int64_t v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Splits on single spaces; empty fields are kept so that "a  b" is detectable.
std::vector<std::string_view> split_spaces(std::string_view line);

std::string trim(std::string_view s);

// Reads a text file into lines. A trailing newline does not produce an extra
// empty line. Throws Error(Io) if the file cannot be read.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace zlab::textio
