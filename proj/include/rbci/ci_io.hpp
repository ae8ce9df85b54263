#pragma once

// CI file format (JSON syntax, 1-based orbitals):
//
//   {
//     "format_version": 1,
//     "num_orbitals": M,
//     "num_particles": N,
//     "coefficients": [ {"orbitals": [1, 2], "value": 0.8}, ... ]
//   }
//
// Omitted determinants are zero. Writers emit nonzero coefficients sorted
// lexicographically by tuple, with 17 significant digits.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbci/ci_tensor.hpp"

namespace rbci {

inline constexpr int kCIFormatVersion = 1;

class CIFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "%.17g" formatting, used for every floating value the project writes.
inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

inline std::string ci_to_string(const CITensor& t) {
  std::ostringstream out;
  out << "{\n"
      << "  \"format_version\": " << kCIFormatVersion << ",\n"
      << "  \"num_orbitals\": " << t.num_orbitals() << ",\n"
      << "  \"num_particles\": " << t.num_particles() << ",\n"
      << "  \"coefficients\": [";
  bool first = true;
  for_each_subset_lex(t.num_orbitals(), t.num_particles(), [&](std::span<const int> subset) {
    const double value = t.coefficient(subset);
    if (value == 0.0) return;
    out << (first ? "\n" : ",\n") << "    {\"orbitals\": [";
    for (std::size_t p = 0; p < subset.size(); ++p) {
      out << (p ? ", " : "") << subset[p] + 1;
    }
    out << "], \"value\": " << format_double(value) << "}";
    first = false;
  });
  out << (first ? "]\n" : "\n  ]\n") << "}\n";
  return out.str();
}

/// Parses CI file text. Unnormalized input is rescaled and, when `warnings`
/// is given, a message is appended to it.
inline CITensor ci_from_string(const std::string& text, std::vector<std::string>* warnings = nullptr,
                               const std::string& source = "<string>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CIFileError(source + ": malformed JSON: " + e.what());
  }
  auto fail = [&](const std::string& what) { throw CIFileError(source + ": " + what); };
  if (!doc.is_object()) fail("top level must be an object");
  for (const char* key : {"format_version", "num_orbitals", "num_particles", "coefficients"}) {
    if (!doc.contains(key)) fail(std::string("missing field \"") + key + "\"");
  }
  if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != kCIFormatVersion) {
    fail("unsupported format_version (expected " + std::to_string(kCIFormatVersion) + ")");
  }
  if (!doc["num_orbitals"].is_number_integer() || !doc["num_particles"].is_number_integer()) {
    fail("num_orbitals and num_particles must be integers");
  }
  const int M = doc["num_orbitals"].get<int>();
  const int N = doc["num_particles"].get<int>();
  if (M < 1 || N < 1 || N > M) fail("need 1 <= num_particles <= num_orbitals");
  if (M > kMaxOrbitals) fail("num_orbitals exceeds " + std::to_string(kMaxOrbitals));
  const auto& list = doc["coefficients"];
  if (!list.is_array()) fail("\"coefficients\" must be an array");

  std::vector<TensorEntry> entries;
  entries.reserve(list.size());
  for (std::size_t e = 0; e < list.size(); ++e) {
    const auto& item = list[e];
    const std::string where = "coefficients[" + std::to_string(e) + "]: ";
    if (!item.is_object() || !item.contains("orbitals") || !item.contains("value")) {
      fail(where + "expected {\"orbitals\": [...], \"value\": number}");
    }
    const auto& orbs = item["orbitals"];
    if (!orbs.is_array() || static_cast<int>(orbs.size()) != N) {
      fail(where + "\"orbitals\" must list exactly " + std::to_string(N) + " integers");
    }
    if (!item["value"].is_number()) fail(where + "\"value\" must be a number");
    TensorEntry entry;
    entry.value = item["value"].get<double>();
    if (!std::isfinite(entry.value)) fail(where + "non-finite value");
    for (std::size_t p = 0; p < orbs.size(); ++p) {
      if (!orbs[p].is_number_integer()) fail(where + "orbital indices must be integers");
      const int orbital = orbs[p].get<int>();
      if (orbital < 1 || orbital > M) {
        fail(where + "orbital " + std::to_string(orbital) + " outside 1.." + std::to_string(M));
      }
      if (p > 0 && orbital <= entry.orbitals.back() + 1) {
        fail(where + "orbital tuple must be strictly ascending");
      }
      entry.orbitals.push_back(orbital - 1);
    }
    entries.push_back(std::move(entry));
  }

  double norm2 = 0.0;
  for (const auto& entry : entries) norm2 += entry.value * entry.value;
  if (norm2 == 0.0) fail("all coefficients are zero");
  if (std::abs(norm2 - 1.0) > 1e-12 && warnings != nullptr) {
    warnings->push_back(source + ": coefficients not normalized (sum of squares " +
                        format_double(norm2) + "); renormalized");
  }
  try {
    return make_tensor(M, N, entries);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  throw CIFileError(source + ": unreachable");
}

inline CITensor load_ci_file(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw CIFileError(path.string() + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ci_from_string(buffer.str(), warnings, path.string());
}

inline void save_ci_file(const CITensor& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CIFileError(path.string() + ": cannot open for writing");
  out << ci_to_string(t);
  if (!out) throw CIFileError(path.string() + ": write failed");
}

}  // namespace rbci
