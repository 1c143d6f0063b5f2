#include "mrp/market.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mrp/errors.hpp"

namespace mrp {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto first = field.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      out.emplace_back();
    } else {
      const auto last = field.find_last_not_of(" \t\r");
      out.push_back(field.substr(first, last - first + 1));
    }
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& field, std::size_t row, std::size_t col) {
  if (field.empty()) {
    throw Error(Errc::data, "missing value at row " + std::to_string(row) +
                                ", column " + std::to_string(col));
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE ||
      !std::isfinite(v)) {
    throw Error(Errc::data, "non-numeric value '" + field + "' at row " +
                                std::to_string(row) + ", column " +
                                std::to_string(col));
  }
  return v;
}

}  // namespace

LogPriceMatrix load_csv(const std::filesystem::path& path, PriceScale scale) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::data, "cannot open '" + path.string() + "'");
  }

  std::string line;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (names.empty()) {
      names = split_fields(line);
      if (names.size() < 2) {
        throw Error(Errc::data, "header must name at least 2 assets");
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != names.size()) {
      throw Error(Errc::data,
                  "row " + std::to_string(rows.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(names.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = parse_cell(fields[c], rows.size() + 1, c + 1);
      if (scale == PriceScale::raw_prices) {
        if (v <= 0.0) {
          throw Error(Errc::data,
                      "non-positive raw price at row " +
                          std::to_string(rows.size() + 1) + ", column " +
                          std::to_string(c + 1));
        }
        v = std::log(v);
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }

  if (rows.size() < 2) {
    throw Error(Errc::data, "need at least 2 data rows, got " +
                                std::to_string(rows.size()));
  }

  LogPriceMatrix panel;
  panel.asset_names = std::move(names);
  panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(panel.asset_names.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t c = 0; c < rows[t].size(); ++c) {
      panel.values(static_cast<Eigen::Index>(t),
                   static_cast<Eigen::Index>(c)) = rows[t][c];
    }
  }
  return panel;
}

void write_csv(const std::filesystem::path& path, const LogPriceMatrix& panel,
               const std::vector<std::string>& metadata_comments) {
  std::ofstream out(path);
  if (!out) {
    throw Error(Errc::data, "cannot write '" + path.string() + "'");
  }
  out.precision(17);
  for (const auto& c : metadata_comments) out << "# " << c << "\n";
  for (Eigen::Index m = 0; m < panel.M(); ++m) {
    out << (m ? "," : "") << panel.asset_names[static_cast<std::size_t>(m)];
  }
  out << "\n";
  for (Eigen::Index t = 0; t < panel.T(); ++t) {
    for (Eigen::Index m = 0; m < panel.M(); ++m) {
      out << (m ? "," : "") << panel.values(t, m);
    }
    out << "\n";
  }
  if (!out) {
    throw Error(Errc::data, "write failed for '" + path.string() + "'");
  }
}

SpreadPanel make_spreads(const LogPriceMatrix& prices,
                         const Eigen::MatrixXd& hedge) {
  if (hedge.cols() != prices.M()) {
    throw Error(Errc::data,
                "hedge has " + std::to_string(hedge.cols()) +
                    " columns but panel has " + std::to_string(prices.M()) +
                    " assets");
  }
  for (Eigen::Index n = 0; n < hedge.rows(); ++n) {
    if (hedge.row(n).norm() == 0.0) {
      throw Error(Errc::data, "hedge row " + std::to_string(n) + " is zero");
    }
  }
  SpreadPanel panel;
  panel.hedge = hedge;
  panel.values = prices.values * hedge.transpose();
  return panel;
}

}  // namespace mrp
