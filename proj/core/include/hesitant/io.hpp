#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace hesitant::io {

std::ifstream open_input(const std::filesystem::path& path);
/// Creates parent directories as needed.
std::ofstream open_output(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string_view trim(std::string_view text);

/// RFC 4180 style: commas separate, double quotes group, "" escapes a quote.
std::vector<std::string> split_csv_row(std::string_view line);
std::string csv_field(std::string_view value);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double value);
/// Throws ParseError(line) unless the whole cell is a finite decimal.
double parse_real(std::string_view cell, std::size_t line);

} // namespace hesitant::io
