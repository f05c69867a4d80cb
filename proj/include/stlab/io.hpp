#pragma once

#include <string>
#include <vector>

namespace stlab {

// Git blob hash: SHA-1 of "blob <size>\0" + content, lowercase hex.
std::string git_blob_hash(const std::string& content);
std::string file_git_hash(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Shortest round-trip decimal representation.
std::string fmt_double(double v);

// Writes header + rows as CSV.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace stlab
