#pragma once

#include <string>
#include <vector>

namespace akg {

std::vector<std::string> split_tabs(const std::string& line);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::string to_lower_ascii(std::string s);

// Filename without directories or the last extension; used as the default
// domain id for corpus-like files.
std::string path_stem(const std::string& path);

}  // namespace akg
