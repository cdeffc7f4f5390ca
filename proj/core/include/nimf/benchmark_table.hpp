#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nimf {

struct BenchmarkEntry {
  int table = 0;
  std::string system;
  std::string method;
  std::optional<double> delta;  // empty for caption values
  std::optional<double> value;  // log10 k, or β_c for the beta_c_* methods; empty when not printed
  std::string marker;           // "*" above crossover, "diamond" no crossover found
  std::string provenance;
};

class BenchmarkTable {
 public:
  // the copy compiled into the library
  static const BenchmarkTable& embedded();
  static BenchmarkTable parse(std::string_view csv);
  static BenchmarkTable load(const std::string& path);

  const std::vector<BenchmarkEntry>& entries() const { return entries_; }
  std::optional<BenchmarkEntry> find(std::string_view system, std::string_view method,
                                     double delta) const;
  std::vector<BenchmarkEntry> select(std::string_view system, std::string_view method) const;

 private:
  std::vector<BenchmarkEntry> entries_;
};

}  // namespace nimf
