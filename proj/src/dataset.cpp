#include "gibbs_causal/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gc {

Eigen::Index Dataset::col(const std::string& name) const {
  for (Eigen::Index j = 0; j < (Eigen::Index)names.size(); ++j)
    if (names[j] == name) return j;
  throw config_error("unknown covariate column '" + name + "'");
}

void Dataset::validate() const {
  const auto m = n();
  if (m < 1) throw data_error("dataset is empty");
  if (d.size() != m || X.rows() != m)
    throw data_error("y/d/X row counts disagree");
  if ((Eigen::Index)names.size() != X.cols())
    throw data_error("covariate label count does not match X columns");
  bool any1 = false, any0 = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(y[i])) throw data_error("non-finite outcome at row " + std::to_string(i + 1));
    if (d[i] != 0.0 && d[i] != 1.0)
      throw data_error("treatment must be 0/1, got " + std::to_string(d[i]) + " at row " + std::to_string(i + 1));
    (d[i] == 1.0 ? any1 : any0) = true;
  }
  if (!X.allFinite()) throw data_error("non-finite covariate value");
  if (!any1 || !any0) throw data_error("need at least one treated and one untreated unit");
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

Dataset read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw data_error("empty dataset file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  Eigen::Index ycol = -1, dcol = -1;
  std::vector<Eigen::Index> xcols;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < (Eigen::Index)header.size(); ++j) {
    if (header[j] == "y") ycol = j;
    else if (header[j] == "d") dcol = j;
    else {
      xcols.push_back(j);
      names.push_back(header[j]);
    }
  }
  if (ycol < 0 || dcol < 0) throw data_error("dataset header must contain 'y' and 'd' columns");

  std::vector<std::vector<double>> rows;
  Eigen::Index lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw data_error("row " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    std::vector<double> vals(cells.size());
    for (size_t j = 0; j < cells.size(); ++j) {
      try {
        size_t used = 0;
        vals[j] = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw data_error("row " + std::to_string(lineno) + ", column '" + header[j] +
                         "': cannot parse '" + cells[j] + "' as a number");
      }
    }
    rows.push_back(std::move(vals));
  }
  const Eigen::Index n = (Eigen::Index)rows.size();
  Dataset ds;
  ds.y.resize(n);
  ds.d.resize(n);
  ds.X.resize(n, (Eigen::Index)xcols.size());
  ds.names = names;
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.y[i] = rows[i][ycol];
    ds.d[i] = rows[i][dcol];
    for (Eigen::Index j = 0; j < (Eigen::Index)xcols.size(); ++j) ds.X(i, j) = rows[i][xcols[j]];
  }
  ds.validate();
  return ds;
}

NamedMatrix read_named_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open file '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw data_error("empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  NamedMatrix out;
  out.names = split_csv_line(line);
  if (out.names.empty()) throw data_error("no columns in '" + path + "'");

  std::vector<std::vector<double>> rows;
  Eigen::Index lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != out.names.size())
      throw data_error("row " + std::to_string(lineno) + ": expected " +
                       std::to_string(out.names.size()) + " fields, got " +
                       std::to_string(cells.size()));
    std::vector<double> vals(cells.size());
    for (size_t j = 0; j < cells.size(); ++j) {
      try {
        size_t used = 0;
        vals[j] = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw data_error("row " + std::to_string(lineno) + ", column '" + out.names[j] +
                         "': cannot parse '" + cells[j] + "' as a number");
      }
    }
    rows.push_back(std::move(vals));
  }
  out.values.resize((Eigen::Index)rows.size(), (Eigen::Index)out.names.size());
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) out.values(i, j) = rows[i][j];
  return out;
}

void write_matrix_csv(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& header) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot open '" + path + "' for writing");
  f.precision(17);
  for (size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
  f << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) f << (j ? "," : "") << m(i, j);
    f << "\n";
  }
}

}  // namespace gc
