#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rayleigh {

/// Writes through a temporary file in the same directory followed by a rename, creating
/// parent directories as needed. Throws Error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits, round-trip exact for doubles.
std::string format_double(double x);

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// git describe of the source tree at configure time ("unknown" outside a repository).
std::string code_version();

}  // namespace rayleigh
