#pragma once

#include <string>
#include <vector>

#include <singulax/types.hpp>

namespace singulax {

/// 17-significant-digit decimal form (round-trip exact for doubles);
/// infinities serialize as "inf" / "-inf".
std::string fmt17(double v);

double parse_double(const std::string& s);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace singulax
