#include "nimf/benchmark_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nimf/errors.hpp"
#include "table_data.hpp"

namespace nimf {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> number(const std::string& s, int row) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorKind::invalid_input, "benchmark table row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

BenchmarkTable BenchmarkTable::parse(std::string_view csv) {
  BenchmarkTable t;
  std::istringstream in{std::string(csv)};
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || row == 1) continue;
    const auto c = split(line);
    if (c.size() != 7)
      fail(ErrorKind::invalid_input, "benchmark table row " + std::to_string(row) + ": expected 7 columns");
    BenchmarkEntry e;
    const auto table = number(c[0], row);
    if (!table) fail(ErrorKind::invalid_input, "benchmark table row " + std::to_string(row) + ": no table id");
    e.table = static_cast<int>(*table);
    e.system = c[1];
    e.method = c[2];
    e.delta = number(c[3], row);
    e.value = number(c[4], row);
    e.marker = c[5];
    e.provenance = c[6];
    t.entries_.push_back(std::move(e));
  }
  return t;
}

const BenchmarkTable& BenchmarkTable::embedded() {
  static const BenchmarkTable t = parse(detail::kEmbeddedTable);
  return t;
}

BenchmarkTable BenchmarkTable::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::optional<BenchmarkEntry> BenchmarkTable::find(std::string_view system, std::string_view method,
                                                   double delta) const {
  for (const auto& e : entries_)
    if (e.system == system && e.method == method && e.delta && std::abs(*e.delta - delta) <= 1e-9 * std::max(1.0, delta))
      return e;
  return std::nullopt;
}

std::vector<BenchmarkEntry> BenchmarkTable::select(std::string_view system, std::string_view method) const {
  std::vector<BenchmarkEntry> out;
  for (const auto& e : entries_)
    if (e.system == system && e.method == method) out.push_back(e);
  return out;
}

}  // namespace nimf
