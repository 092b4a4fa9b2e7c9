// 2 x J contingency table: two independent treatment samples over J ordered
// response categories.  Row 1 is the reference treatment, row 2 the one
// suspected of shifting responses toward higher categories.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lro {

// Raised on malformed CSV/JSON input; carries a 1-based line/column position
// for the CLI diagnostic.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) +
                           ", column " + std::to_string(col) + ")"),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

// Raised when a table cannot support the requested analysis at all
// (zero row total, all mass in one column for the rank test, ...).
class degenerate_data_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Table {
 public:
  // counts must be 2 x J, J >= 2, entries >= 0, both row sums > 0
  explicit Table(Eigen::MatrixXd counts);

  const Eigen::MatrixXd& counts() const { return counts_; }
  Eigen::Index J() const { return counts_.cols(); }
  double n1() const { return counts_.row(0).sum(); }
  double n2() const { return counts_.row(1).sum(); }
  double n() const { return counts_.sum(); }
  Eigen::VectorXd column_totals() const { return counts_.colwise().sum(); }

  // counts flattened lexicographically: (N11..N1J, N21..N2J)
  Eigen::VectorXd flatten() const;

  // empirical cell proportions, same layout
  Eigen::VectorXd empirical_probs() const { return flatten() / n(); }

  // copy with every zero cell replaced by eps, so that logarithms of
  // empirical frequencies exist; fitted probabilities stay positive
  Table epsilon_adjusted(double eps = 1e-5) const;

  bool has_zero_cell() const { return (counts_.array() == 0.0).any(); }

 private:
  Eigen::MatrixXd counts_;
};

// Ingestion.  CSV: exactly two lines of comma-separated nonnegative integer
// cells, equal length.  JSON: {"counts": [[...],[...]]}.  Both throw
// parse_error with a line/column position on malformed input.
Table read_csv(std::istream& in);
Table read_json(std::istream& in);

// Dispatch on leading character ('{' -> JSON, otherwise CSV).
Table read_table(std::istream& in);
Table read_table_file(const std::string& path);

}  // namespace lro
