#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace psmplace {

inline constexpr const char* kToolVersion = "0.1.0";

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Writes to a sibling temp file and renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// "%.{digits}g" formatting.
std::string format_double(double v, int digits);

}  // namespace psmplace
