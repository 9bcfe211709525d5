#pragma once

#include <string>
#include <vector>

#include "medsens/mediation.hpp"

namespace medsens {

struct CsvTable {
  std::vector<std::string> header;
  MatrixXd values;
};

// Header row required; every cell must parse as a finite number (no missing values).
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

struct ColumnRoles {
  std::string outcome;
  std::string exposure;
  std::vector<std::string> mediators;
  std::vector<std::string> covariates;
};

MediationData data_from_table(const CsvTable& table, const ColumnRoles& roles);

std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace medsens
