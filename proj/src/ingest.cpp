#include "ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"

namespace genheck {

namespace {

constexpr const char* kIntercept = "(Intercept)";

bool is_missing(const std::string& field) { return field.empty() || field == "NA"; }

double parse_number(const std::string& field, std::size_t record, const std::string& column) {
  double value = 0.0;
  std::size_t start = 0;
  std::size_t end = field.size();
  while (start < end && field[start] == ' ') ++start;
  while (end > start && field[end - 1] == ' ') --end;
  const char* first = field.data() + start;
  const char* last = field.data() + end;
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error(ErrorCode::kParseError, "row " + std::to_string(record) + ", column '" + column +
                                            "': cannot parse '" + field + "' as a number");
  }
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw Error(ErrorCode::kParseError,
                      "line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": unterminated quote");
  }
  if (field_started || !record.empty()) end_record();
  return records;
}

Dataset ingest(std::istream& in, const ModelConfig& config) {
  auto records = parse_csv(in);
  if (records.empty()) throw Error(ErrorCode::kSchemaError, "CSV input is empty (no header row)");
  const std::vector<std::string>& header = records.front();
  std::map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) column_of.emplace(header[c], c);

  auto lookup = [&](const std::string& name) {
    auto it = column_of.find(name);
    if (it == column_of.end()) {
      throw Error(ErrorCode::kSchemaError, "column '" + name + "' not found in CSV header");
    }
    return it->second;
  };
  if (config.outcome.empty() || config.selection.empty()) {
    throw Error(ErrorCode::kSchemaError, "outcome and selection columns must be named");
  }
  const std::size_t y_col = lookup(config.outcome);
  const std::size_t u_col = lookup(config.selection);
  const std::vector<std::string>* lists[] = {
      &config.outcome_covariates, &config.selection_covariates, &config.dispersion_covariates,
      &config.correlation_covariates};
  std::array<std::vector<std::size_t>, 4> cols;
  for (int b = 0; b < 4; ++b) {
    for (const auto& name : *lists[b]) cols[b].push_back(lookup(name));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(records.size()) - 1;
  if (n < 1) throw Error(ErrorCode::kSchemaError, "CSV has a header but no data rows");
  Eigen::VectorXd y(n);
  Eigen::VectorXi u(n);
  std::array<Eigen::MatrixXd, 4> designs;
  for (int b = 0; b < 4; ++b) {
    const Eigen::Index width = static_cast<Eigen::Index>(cols[b].size()) + (config.intercepts[b] ? 1 : 0);
    designs[b].resize(n, width);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i) + 1];
    const std::size_t row = static_cast<std::size_t>(i) + 1;
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::kParseError, "row " + std::to_string(row) + ": expected " +
                                              std::to_string(header.size()) + " fields, found " +
                                              std::to_string(rec.size()));
    }
    const std::string& sel = rec[u_col];
    if (is_missing(sel)) {
      throw Error(ErrorCode::kValueError, "row " + std::to_string(row) + ": selection value missing");
    }
    const double sel_value = parse_number(sel, row, config.selection);
    if (sel_value != 0.0 && sel_value != 1.0) {
      throw Error(ErrorCode::kValueError, "row " + std::to_string(row) + ": selection column '" +
                                              config.selection + "' is not binary");
    }
    u[i] = sel_value == 1.0 ? 1 : 0;
    const std::string& out = rec[y_col];
    if (is_missing(out)) {
      if (u[i] == 1) {
        throw Error(ErrorCode::kValueError, "row " + std::to_string(row) +
                                                ": outcome missing for a selected observation");
      }
      y[i] = 0.0;
    } else {
      y[i] = u[i] == 1 ? parse_number(out, row, config.outcome) : 0.0;
    }
    for (int b = 0; b < 4; ++b) {
      Eigen::Index c = 0;
      if (config.intercepts[b]) designs[b](i, c++) = 1.0;
      for (std::size_t k = 0; k < cols[b].size(); ++k, ++c) {
        const std::string& field = rec[cols[b][k]];
        if (is_missing(field)) {
          throw Error(ErrorCode::kValueError, "row " + std::to_string(row) + ": covariate '" +
                                                  (*lists[b])[k] + "' is missing");
        }
        designs[b](i, c) = parse_number(field, row, (*lists[b])[k]);
      }
    }
  }

  Dataset data = Dataset::create(std::move(y), std::move(u), std::move(designs[0]),
                                 std::move(designs[1]), std::move(designs[2]),
                                 std::move(designs[3]));
  std::vector<std::string>* names[] = {&data.names.outcome, &data.names.selection,
                                       &data.names.dispersion, &data.names.correlation};
  for (int b = 0; b < 4; ++b) {
    if (config.intercepts[b]) names[b]->push_back(kIntercept);
    for (const auto& name : *lists[b]) names[b]->push_back(name);
  }
  return data;
}

Dataset ingest_file(const std::string& path, const ModelConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return ingest(in, config);
}

std::string dataset_to_csv(const Dataset& data) {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> columns;
  std::set<std::string> seen;
  const Eigen::MatrixXd* mats[] = {&data.X, &data.W, &data.E, &data.V};
  for (int b = 0; b < 4; ++b) {
    for (Eigen::Index c = 0; c < mats[b]->cols(); ++c) {
      const std::string name = data.column_name(b, c);
      if (name == kIntercept || !seen.insert(name).second) continue;
      names.push_back(name);
      columns.push_back(mats[b]->col(c));
    }
  }
  std::ostringstream os;
  os << "y,u";
  for (const auto& name : names) os << ',' << name;
  os << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    os << (data.u[i] == 1 ? num(data.y[i]) : std::string("NA")) << ',' << data.u[i];
    for (const auto& col : columns) os << ',' << num(col[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace genheck
