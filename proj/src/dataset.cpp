#include "medsens/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "medsens/error.hpp"

namespace medsens {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
  t.header = split_row(line);
  std::set<std::string> seen;
  for (const auto& h : t.header) {
    if (h.empty()) throw Error(ErrorCode::ParseError, "CSV header has an empty column name");
    if (!seen.insert(h).second) throw Error(ErrorCode::ParseError, "duplicate CSV column '" + h + "'");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != t.header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                             " cells, expected " + std::to_string(t.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string& c = cells[j];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column '" + t.header[j] +
                                               "': not a finite number ('" + c + "')");
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open data file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

MediationData data_from_table(const CsvTable& table, const ColumnRoles& roles) {
  auto column = [&](const std::string& name, const char* role) -> Eigen::Index {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw Error(ErrorCode::InvalidArgument, std::string(role) + ": column '" + name + "' not found");
    return static_cast<Eigen::Index>(it - table.header.begin());
  };
  if (roles.outcome.empty()) throw Error(ErrorCode::InvalidArgument, "outcome: no column given");
  if (roles.exposure.empty()) throw Error(ErrorCode::InvalidArgument, "exposure: no column given");
  if (roles.mediators.empty()) throw Error(ErrorCode::InvalidArgument, "mediators: at least one column is required");

  std::set<std::string> used;
  auto claim = [&](const std::string& name, const char* role) {
    if (!used.insert(name).second)
      throw Error(ErrorCode::InvalidArgument, std::string(role) + ": column '" + name + "' is assigned to two roles");
  };
  claim(roles.outcome, "outcome");
  claim(roles.exposure, "exposure");
  for (const auto& m : roles.mediators) claim(m, "mediators");
  for (const auto& c : roles.covariates) claim(c, "covariates");

  const Eigen::Index n = table.values.rows();
  VectorXd y = table.values.col(column(roles.outcome, "outcome"));
  VectorXd a = table.values.col(column(roles.exposure, "exposure"));
  MatrixXd m(n, static_cast<Eigen::Index>(roles.mediators.size()));
  for (std::size_t j = 0; j < roles.mediators.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = table.values.col(column(roles.mediators[j], "mediators"));
  MatrixXd c(n, static_cast<Eigen::Index>(roles.covariates.size()));
  for (std::size_t j = 0; j < roles.covariates.size(); ++j)
    c.col(static_cast<Eigen::Index>(j)) = table.values.col(column(roles.covariates[j], "covariates"));

  MediationData d = make_mediation_data(y, a, m, c);
  d.outcome_label = roles.outcome;
  d.exposure_label = roles.exposure;
  d.mediator_labels = roles.mediators;
  d.covariate_labels = roles.covariates;
  return d;
}

}  // namespace medsens
