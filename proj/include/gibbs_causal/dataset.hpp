#pragma once
#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace gc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Raised on malformed input files / violated data invariants (CLI exit 3).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised on bad configuration: unknown columns, inconsistent specs (CLI exit 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised on numeric failure (CLI exit 4).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  VectorXd y;                      // outcome
  VectorXd d;                      // treatment, entries in {0,1}
  MatrixXd X;                      // n x p covariates
  std::vector<std::string> names;  // p column labels

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  // column index by name; throws config_error when absent
  Eigen::Index col(const std::string& name) const;

  // consistency, d in {0,1}, finiteness, both treatment arms present
  void validate() const;
};

// CSV with header; required columns y and d, all others become covariates
// (order preserved). Comma-delimited, '.' decimal. Throws data_error with
// row/column context on malformed input.
Dataset read_csv(const std::string& path);

// header + all-numeric body (posterior sample tables and the like)
struct NamedMatrix {
  std::vector<std::string> names;
  MatrixXd values;
};
NamedMatrix read_named_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& header);

}  // namespace gc
