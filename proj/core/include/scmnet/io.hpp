#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scmnet/network.hpp"
#include "scmnet/noise.hpp"

namespace scmnet {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16-digit lowercase hex rendering.
std::string to_hex(std::uint64_t value);

struct CsvParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// RFC-4180 quoting: fields containing commas, quotes, or line breaks are
/// wrapped in double quotes with inner quotes doubled.
std::string csv_escape(std::string_view field);

/// One comma-joined, escaped record without a line terminator.
std::string csv_line(const std::vector<std::string>& fields);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

/// Parse quoted CSV (accepting LF or CRLF record ends) into rows of fields.
/// Malformed input throws CsvParseError naming the line and field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::vector<std::vector<std::string>> parse_csv_file(const std::string& path);

/// Network description files use 1-based node indices; the in-memory
/// representation is 0-based.
ExcitationNetwork load_network_json(const std::string& path);
void save_network_json(const std::string& path, const ExcitationNetwork& net);

NoiseProfile load_noise_profile_json(const std::string& path);
void save_noise_profile_json(const std::string& path, const NoiseProfile& profile);

/// Size and content hash of a written output file, for run manifests.
struct ArtifactRecord {
  std::string name;
  std::string path;
  std::uint64_t bytes = 0;
  std::string fnv1a64_hex;
};

ArtifactRecord hash_artifact(const std::string& name, const std::string& path);

}  // namespace scmnet
