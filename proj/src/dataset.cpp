#include "elsurv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "elsurv/errors.hpp"

namespace elsurv {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& tok, int row, const std::string& col) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError("row " + std::to_string(row) + ", column '" + col +
                     "': cannot parse value '" + tok + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Schema Schema::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  Schema s;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("schema line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "y")
      s.y_columns = split_list(val);
    else if (key == "x")
      s.x_columns = split_list(val);
    else if (key == "weight")
      s.weight_column = val;
    else if (key == "rep_prefix")
      s.rep_prefix = val;
    else if (key == "design_weight")
      s.design_weight_column = val;
    else
      throw SchemaError("unknown schema key '" + key + "'");
  }
  if (s.y_columns.empty()) throw SchemaError("schema names no y column");
  if (s.weight_column.empty()) throw SchemaError("schema names no weight column");
  return s;
}

void SurveyDataset::validate() const {
  const int nn = n();
  if (nn < 2) throw ValidationError("dataset needs n >= 2 rows");
  if (Y.rows() != nn || (X.size() > 0 && X.rows() != nn) ||
      (rep.size() > 0 && rep.rows() != nn)) {
    throw ValidationError("column lengths differ");
  }
  for (int i = 0; i < nn; ++i) {
    if (!(w[i] > 0.0))
      throw ValidationError("nonpositive final weight at row " +
                            std::to_string(i + 1));
  }
  if (rep.size() > 0 && rep.minCoeff() < 0.0)
    throw ValidationError("negative replication weight");
  if (design_w) {
    if (design_w->size() != nn)
      throw ValidationError("design-weight column length differs");
    if (design_w->minCoeff() <= 0.0)
      throw ValidationError("nonpositive design weight");
  }
  for (int i = 0; i < nn; ++i) {
    if (!std::isfinite(w[i])) throw ValidationError("non-finite weight");
  }
  if (!Y.allFinite() || !X.allFinite() || (rep.size() > 0 && !rep.allFinite()))
    throw ValidationError("missing or non-finite value in data columns");
}

SurveyDataset load_dataset(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open data file '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty file '" + path + "'");
  std::vector<std::string> names = split_csv_line(header);
  std::unordered_map<std::string, int> pos;
  for (int j = 0; j < static_cast<int>(names.size()); ++j) pos[names[j]] = j;

  auto need = [&](const std::string& col) {
    auto it = pos.find(col);
    if (it == pos.end())
      throw SchemaError("column '" + col + "' not found in data file");
    return it->second;
  };

  std::vector<int> y_idx, x_idx;
  for (const auto& c : schema.y_columns) y_idx.push_back(need(c));
  for (const auto& c : schema.x_columns) x_idx.push_back(need(c));
  int w_idx = need(schema.weight_column);
  int d_idx = -1;
  if (!schema.design_weight_column.empty())
    d_idx = need(schema.design_weight_column);

  // replication columns <prefix>1..<prefix>B must be contiguous from 1
  std::vector<int> rep_idx;
  if (!schema.rep_prefix.empty()) {
    for (int b = 1;; ++b) {
      auto it = pos.find(schema.rep_prefix + std::to_string(b));
      if (it == pos.end()) break;
      rep_idx.push_back(it->second);
    }
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 1;
  const int ncols = static_cast<int>(names.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto toks = split_csv_line(line);
    if (static_cast<int>(toks.size()) != ncols)
      throw ParseError("row " + std::to_string(lineno - 1) + " has " +
                       std::to_string(toks.size()) + " fields, expected " +
                       std::to_string(ncols));
    std::vector<double> vals(ncols);
    for (int j = 0; j < ncols; ++j)
      vals[j] = parse_double(toks[j], lineno - 1, names[j]);
    rows.push_back(std::move(vals));
  }

  const int n = static_cast<int>(rows.size());
  SurveyDataset ds;
  ds.y_names = schema.y_columns;
  ds.x_names = schema.x_columns;
  ds.weight_name = schema.weight_column;
  ds.rep_prefix = schema.rep_prefix;
  ds.design_weight_name = schema.design_weight_column;
  ds.Y.resize(n, static_cast<int>(y_idx.size()));
  ds.X.resize(n, static_cast<int>(x_idx.size()));
  ds.w.resize(n);
  ds.rep.resize(n, static_cast<int>(rep_idx.size()));
  if (d_idx >= 0) ds.design_w = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    for (size_t j = 0; j < y_idx.size(); ++j) ds.Y(i, j) = rows[i][y_idx[j]];
    for (size_t j = 0; j < x_idx.size(); ++j) ds.X(i, j) = rows[i][x_idx[j]];
    ds.w[i] = rows[i][w_idx];
    for (size_t b = 0; b < rep_idx.size(); ++b) ds.rep(i, b) = rows[i][rep_idx[b]];
    if (d_idx >= 0) (*ds.design_w)[i] = rows[i][d_idx];
  }
  ds.validate();
  return ds;
}

void save_dataset(const SurveyDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  char buf[64];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << (last ? "\n" : ",");
  };
  for (size_t j = 0; j < ds.y_names.size(); ++j) out << ds.y_names[j] << ",";
  for (size_t j = 0; j < ds.x_names.size(); ++j) out << ds.x_names[j] << ",";
  out << ds.weight_name;
  if (ds.design_w) out << "," << ds.design_weight_name;
  for (int b = 1; b <= ds.B(); ++b) out << "," << ds.rep_prefix << b;
  out << "\n";
  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.Y.cols(); ++j) put(ds.Y(i, j), false);
    for (int j = 0; j < ds.X.cols(); ++j) put(ds.X(i, j), false);
    bool w_last = !ds.design_w && ds.B() == 0;
    put(ds.w[i], w_last);
    if (ds.design_w) put((*ds.design_w)[i], ds.B() == 0);
    for (int b = 0; b < ds.B(); ++b) put(ds.rep(i, b), b == ds.B() - 1);
  }
}

SurveyDataset rescale_weights(const SurveyDataset& ds, double target) {
  if (!(target > 0.0)) throw ValidationError("rescale target must be > 0");
  SurveyDataset out = ds;
  out.w *= target / ds.w.sum();
  for (int b = 0; b < ds.B(); ++b) {
    double s = ds.rep.col(b).sum();
    if (s > 0.0) out.rep.col(b) *= target / s;
  }
  return out;
}

}  // namespace elsurv
