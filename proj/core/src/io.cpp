#include "scmnet/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace scmnet {

namespace {

using nlohmann::json;

json parse_json_file(const std::string& path, const std::string& expected_format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != expected_format) {
    throw std::runtime_error(path + ": expected a \"format\": \"" + expected_format +
                             "\" document");
  }
  return doc;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  out << csv_line(header) << '\n';
  for (const auto& row : rows) out << csv_line(row) << '\n';
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, header, rows);
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // quoted fields must start at a field boundary
  std::size_t line = 1;

  auto fail = [&](const std::string& what) {
    throw CsvParseError("CSV line " + std::to_string(line) + ", field " +
                        std::to_string(row.size() + 1) + ": " + what);
  };
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    ++line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) fail("quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) fail("unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_record();
  return rows;
}

std::vector<std::vector<std::string>> parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

ExcitationNetwork load_network_json(const std::string& path) {
  const json doc = parse_json_file(path, "scmnet-network");
  try {
    const auto energies = doc.at("site_energies").get<std::vector<double>>();
    const auto rows = doc.at("couplings").get<std::vector<std::vector<double>>>();
    const int n = static_cast<int>(energies.size());
    Eigen::VectorXd site_energies(n);
    for (int i = 0; i < n; ++i) site_energies(i) = energies[i];
    if (static_cast<int>(rows.size()) != n) {
      throw std::runtime_error(path + ": couplings must be a " + std::to_string(n) + "x" +
                               std::to_string(n) + " matrix");
    }
    Eigen::MatrixXd couplings(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) {
        throw std::runtime_error(path + ": couplings row " + std::to_string(i + 1) +
                                 " has wrong length");
      }
      for (int j = 0; j < n; ++j) couplings(i, j) = rows[i][j];
    }
    const int initial = doc.at("initial_node").get<int>();
    const int sink = doc.at("sink_node").get<int>();
    if (initial < 1 || initial > n || sink < 1 || sink > n) {
      throw std::runtime_error(path + ": node indices are 1-based and must lie in [1, " +
                               std::to_string(n) + "]");
    }
    return ExcitationNetwork(site_energies, couplings, initial - 1, sink - 1,
                             doc.at("sink_rate").get<double>());
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid network file " + path + ": " + e.what());
  }
}

void save_network_json(const std::string& path, const ExcitationNetwork& net) {
  const int n = net.n_sites();
  json doc;
  doc["format"] = "scmnet-network";
  doc["version"] = 1;
  std::vector<double> energies(n);
  for (int i = 0; i < n; ++i) energies[i] = net.site_energies()(i);
  doc["site_energies"] = energies;
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rows[i][j] = net.couplings()(i, j);
  }
  doc["couplings"] = rows;
  doc["initial_node"] = net.initial_node() + 1;
  doc["sink_node"] = net.sink_node() + 1;
  doc["sink_rate"] = net.sink_rate();
  write_json_file(path, doc);
}

NoiseProfile load_noise_profile_json(const std::string& path) {
  const json doc = parse_json_file(path, "scmnet-noise-profile");
  try {
    const auto rate = doc.at("rate").get<std::vector<double>>();
    const auto shape = doc.at("shape").get<std::vector<double>>();
    if (rate.size() != shape.size()) {
      throw std::runtime_error(path + ": rate and shape must have equal length");
    }
    NoiseProfile profile;
    const int n = static_cast<int>(rate.size());
    profile.rate = Eigen::VectorXd(n);
    profile.shape = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      profile.rate(i) = rate[i];
      profile.shape(i) = shape[i];
    }
    profile.theta = doc.at("theta").get<double>();
    profile.validate();
    return profile;
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid noise profile file " + path + ": " + e.what());
  }
}

void save_noise_profile_json(const std::string& path, const NoiseProfile& profile) {
  json doc;
  doc["format"] = "scmnet-noise-profile";
  doc["version"] = 1;
  doc["theta"] = profile.theta;
  const int n = profile.n_sites();
  std::vector<double> rate(n), shape(n);
  for (int i = 0; i < n; ++i) {
    rate[i] = profile.rate(i);
    shape[i] = profile.shape(i);
  }
  doc["rate"] = rate;
  doc["shape"] = shape;
  write_json_file(path, doc);
}

ArtifactRecord hash_artifact(const std::string& name, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open artifact " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return ArtifactRecord{name, path, bytes.size(), to_hex(fnv1a64(bytes))};
}

}  // namespace scmnet
