#include "recomb/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "recomb/errors.hpp"

namespace recomb::io {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  return x;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[i] = digits[x & 15];
  return s;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// RFC 4180: quote cells holding a comma, quote or line break.
void append_cell(std::string& out, const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

CsvBuilder::CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

CsvBuilder& CsvBuilder::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("csv: row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    append_cell(out_, cells[i]);
  }
  out_ += '\n';
  return *this;
}

namespace {

std::string table_csv(std::span<const double> values) {
  CsvBuilder csv({"index", "value"});
  for (std::size_t i = 0; i < values.size(); ++i)
    csv.row({std::to_string(i), format_double(values[i])});
  return csv.str();
}

nlohmann::json table_json(int n, const char* kind, std::span<const double> values) {
  return {{"n", n}, {"kind", kind}, {"values", std::vector<double>(values.begin(), values.end())}};
}

std::vector<double> values_from_json(const nlohmann::json& j, const char* kind, int& n) {
  try {
    if (j.at("kind").get<std::string>() != kind)
      throw InvalidArgument(std::string("json record: expected kind \"") + kind + "\"");
    n = j.at("n").get<int>();
    return j.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("json record: ") + e.what());
  }
}

bool is_json(const std::filesystem::path& path) { return path.extension() == ".json"; }

}  // namespace

std::string to_csv(const Pmf& mu) { return table_csv(mu.weights()); }
std::string to_csv(const FourierTable& f) { return table_csv(f.coeffs()); }
nlohmann::json to_json(const Pmf& mu) { return table_json(mu.n(), "pmf", mu.weights()); }
nlohmann::json to_json(const FourierTable& f) { return table_json(f.n(), "fourier", f.coeffs()); }

std::vector<double> table_from_csv(std::string_view text, int& n) {
  std::vector<double> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "index,value") throw InvalidArgument("csv line 1: expected header index,value");
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos)
      throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected two fields");
    const double index = parse_double(line.substr(0, comma));
    if (index != static_cast<double>(values.size()))
      throw InvalidArgument("csv line " + std::to_string(line_no) + ": index out of order");
    values.push_back(parse_double(line.substr(comma + 1)));
  }
  if (values.empty() || !std::has_single_bit(values.size()))
    throw InvalidArgument("csv: row count " + std::to_string(values.size()) +
                          " is not a power of two");
  n = std::countr_zero(values.size());
  return values;
}

Pmf read_pmf(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  int n = 0;
  if (is_json(path)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(path.string() + ": " + e.what());
    }
    if (j.value("kind", "") == "fourier") {
      auto values = values_from_json(j, "fourier", n);
      return wht_inverse(FourierTable(n, std::move(values)));
    }
    auto values = values_from_json(j, "pmf", n);
    return Pmf(n, std::move(values));
  }
  auto values = table_from_csv(text, n);
  return Pmf(n, std::move(values));
}

FourierTable read_fourier(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  int n = 0;
  if (is_json(path)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(path.string() + ": " + e.what());
    }
    if (j.value("kind", "") == "pmf") {
      auto values = values_from_json(j, "pmf", n);
      return wht_forward(Pmf(n, std::move(values)));
    }
    auto values = values_from_json(j, "fourier", n);
    return FourierTable(n, std::move(values));
  }
  auto values = table_from_csv(text, n);
  return FourierTable(n, std::move(values));
}

std::string environment_csv(const QuenchedEnvironment& env) {
  CsvBuilder csv({"leaf", "site", "spin"});
  for (std::size_t x = 0; x < env.leaves; ++x)
    for (int i = 0; i < env.n; ++i)
      csv.row({std::to_string(x), std::to_string(i + 1), std::to_string(env.spin(x, i))});
  return csv.str();
}

std::string tree_csv(const YuleTree& tree) {
  CsvBuilder csv({"node", "parent", "birth_time"});
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    csv.row({std::to_string(i), std::to_string(tree.nodes[i].parent),
             format_double(tree.nodes[i].birth_time)});
  return csv.str();
}

std::string w_csv(std::span<const MartingaleSample> samples) {
  CsvBuilder csv({"sample", "t", "W", "leaves"});
  for (std::size_t k = 0; k < samples.size(); ++k)
    csv.row({std::to_string(k), format_double(samples[k].t), format_double(samples[k].W),
             std::to_string(samples[k].leaf_count)});
  return csv.str();
}

std::string w_csv(std::span<const ClosureSample> samples, double horizon) {
  CsvBuilder csv({"sample", "t", "W", "leaves"});
  for (std::size_t k = 0; k < samples.size(); ++k)
    csv.row({std::to_string(k), format_double(horizon), format_double(samples[k].W),
             std::to_string(samples[k].leaves)});
  return csv.str();
}

}  // namespace recomb::io
