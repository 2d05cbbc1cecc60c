#pragma once

// Text serialisation: CSV tables (header row, '.' decimal, shortest
// round-trip doubles) and JSON records.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recomb/cube.hpp"
#include "recomb/discrete.hpp"
#include "recomb/martingale.hpp"
#include "recomb/yule.hpp"

namespace recomb::io {

/// Shortest decimal that parses back to the same double; locale independent.
std::string format_double(double x);
double parse_double(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);
  CsvBuilder& row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  std::size_t columns_;
  std::string out_;
};

std::string to_csv(const Pmf& mu);
std::string to_csv(const FourierTable& f);
nlohmann::json to_json(const Pmf& mu);
nlohmann::json to_json(const FourierTable& f);

/// Parses `index,value` rows; the row count must be a power of two and
/// indices must run 0..2^n-1 in order.
std::vector<double> table_from_csv(std::string_view text, int& n);

/// Reads a Pmf from .json ({n, kind, values}; a "fourier" record is
/// inverted) or from an `index,value` CSV of weights.
Pmf read_pmf(const std::filesystem::path& path);
FourierTable read_fourier(const std::filesystem::path& path);

std::string environment_csv(const QuenchedEnvironment& env);
std::string tree_csv(const YuleTree& tree);
std::string w_csv(std::span<const MartingaleSample> samples);
std::string w_csv(std::span<const ClosureSample> samples, double horizon);

}  // namespace recomb::io
