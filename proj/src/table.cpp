#include "lro/table.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace lro {

Table::Table(Eigen::MatrixXd counts) : counts_(std::move(counts)) {
  if (counts_.rows() != 2)
    throw std::invalid_argument("Table: exactly two treatment rows required");
  if (counts_.cols() < 2)
    throw std::invalid_argument("Table: at least two response categories required");
  if (!counts_.allFinite() || (counts_.array() < 0.0).any())
    throw std::invalid_argument("Table: counts must be finite and nonnegative");
  if (counts_.row(0).sum() <= 0.0 || counts_.row(1).sum() <= 0.0)
    throw degenerate_data_error("Table: each treatment row needs at least one observation");
}

Eigen::VectorXd Table::flatten() const {
  Eigen::VectorXd v(2 * J());
  v.head(J()) = counts_.row(0).transpose();
  v.tail(J()) = counts_.row(1).transpose();
  return v;
}

Table Table::epsilon_adjusted(double eps) const {
  if (eps <= 0.0)
    throw std::invalid_argument("epsilon_adjusted: eps must be positive");
  Eigen::MatrixXd c = counts_;
  c = (c.array() == 0.0).select(eps, c);
  return Table(std::move(c));
}

namespace {

// One CSV row -> cell values; records the 1-based column (character position)
// of each field so errors can point at the offending token.
std::vector<double> parse_csv_row(const std::string& line, int lineno) {
  std::vector<double> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    const std::string field =
        line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t b = field.find_first_not_of(" \t");
    std::size_t e = field.find_last_not_of(" \t\r");
    const int col = static_cast<int>(pos) + 1 + (b == std::string::npos ? 0 : static_cast<int>(b));
    if (b == std::string::npos)
      throw parse_error("empty cell", lineno, col);
    const std::string tok = field.substr(b, e - b + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw parse_error("not a number: '" + tok + "'", lineno, col);
    }
    if (used != tok.size())
      throw parse_error("trailing junk in cell: '" + tok + "'", lineno, col);
    if (!std::isfinite(value) || value < 0.0)
      throw parse_error("counts must be finite and nonnegative", lineno, col);
    if (value != std::floor(value))
      throw parse_error("counts must be whole numbers", lineno, col);
    cells.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cells;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Table read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  int first_row_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (rows.size() == 2)
      throw parse_error("exactly two treatment rows required", lineno, 1);
    if (rows.empty()) first_row_line = lineno;
    rows.push_back(parse_csv_row(line, lineno));
  }
  if (rows.empty()) throw parse_error("empty input", lineno + 1, 1);
  if (rows.size() != 2)
    throw parse_error("exactly two treatment rows required", lineno + 1, 1);
  if (rows[0].size() != rows[1].size())
    throw parse_error("rows have different lengths (" +
                          std::to_string(rows[0].size()) + " vs " +
                          std::to_string(rows[1].size()) + ")",
                      first_row_line + 1, 1);
  if (rows[0].size() < 2)
    throw parse_error("at least two response categories required", first_row_line, 1);
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(rows[0].size()));
  for (int i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(i, static_cast<Eigen::Index>(j)) = rows[i][j];
  try {
    return Table(std::move(m));
  } catch (const degenerate_data_error&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw parse_error(ex.what(), first_row_line, 1);
  }
}

namespace {

// Map a nlohmann byte offset back to a 1-based line/column pair.
std::pair<int, int> offset_to_linecol(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Table read_json(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    auto [line, col] = offset_to_linecol(text, ex.byte > 0 ? ex.byte - 1 : 0);
    throw parse_error(std::string("invalid JSON: ") + ex.what(), line, col);
  }
  if (!doc.is_object() || !doc.contains("counts"))
    throw parse_error("expected an object with a \"counts\" key", 1, 1);
  const auto& counts = doc["counts"];
  if (!counts.is_array() || counts.size() != 2)
    throw parse_error("\"counts\" must hold exactly two rows", 1, 1);
  std::vector<std::vector<double>> rows(2);
  for (int i = 0; i < 2; ++i) {
    const auto& row = counts[i];
    if (!row.is_array() || row.size() < 2)
      throw parse_error("each row needs at least two numeric cells", 1, 1);
    for (const auto& cell : row) {
      if (!cell.is_number())
        throw parse_error("counts must be numbers", 1, 1);
      const double v = cell.get<double>();
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
        throw parse_error("counts must be nonnegative whole numbers", 1, 1);
      rows[i].push_back(v);
    }
  }
  if (rows[0].size() != rows[1].size())
    throw parse_error("rows have different lengths", 1, 1);
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(rows[0].size()));
  for (int i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(i, static_cast<Eigen::Index>(j)) = rows[i][j];
  try {
    return Table(std::move(m));
  } catch (const degenerate_data_error&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw parse_error(ex.what(), 1, 1);
  }
}

Table read_table(std::istream& in) {
  // peek past leading whitespace to decide the format
  int c;
  while ((c = in.peek()) != EOF && std::isspace(c)) in.get();
  if (c == '{' || c == '[') return read_json(in);
  return read_csv(in);
}

Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open file: " + path, 1, 1);
  return read_table(in);
}

}  // namespace lro
