#ifndef STAR_TESTS_FILES_HPP
#define STAR_TESTS_FILES_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace star::testing {

// STAR_SOURCE_DIR is set by the test build.
inline std::string source_path(const std::string& relative) { return std::string(STAR_SOURCE_DIR) + "/" + relative; }

inline std::string read_file(const std::string& relative) {
  std::ifstream in(source_path(relative), std::ios::binary);
  if (!in) throw std::runtime_error("missing test file " + relative);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string squeeze_whitespace(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out += c;
  }
  return out;
}

}  // namespace star::testing

#endif  // STAR_TESTS_FILES_HPP
