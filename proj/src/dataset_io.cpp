#include "rolem/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace rolem::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_number(const std::string& cell, double* out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + cell.size()) return false;
  *out = v;
  return true;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

model::LongitudinalDataset ingest(const std::string& path, bool strict,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_csv_line(strip_cr(line));
  if (header.size() < 4 || header[0] != "subject_id" ||
      header[1] != "time_index")
    throw DataError(path +
                    ": header must start with subject_id,time_index,y_1,...");
  int r = 0, p = 0;
  std::size_t col = 2;
  while (col < header.size() && header[col] == "y_" + std::to_string(r + 1)) {
    ++r;
    ++col;
  }
  while (col < header.size() && header[col] == "x_" + std::to_string(p + 1)) {
    ++p;
    ++col;
  }
  if (r < 1 || p < 1 || col != header.size())
    throw DataError(path + ": header must be subject_id,time_index,y_1..y_" +
                    std::to_string(std::max(r, 1)) + ",x_1..x_p");

  struct Row {
    long time;
    Eigen::VectorXd y;
    Eigen::VectorXd x;
  };
  std::vector<std::string> subject_order;
  std::map<std::string, std::vector<Row>> rows;
  std::map<std::string, std::map<long, int>> seen_times;  // time -> line no
  std::vector<std::string> dropped_subjects;

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    const std::string& subject = cells[0];
    if (subject.empty())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": empty subject_id");

    double time_val = 0.0;
    if (cells[1].empty() || !parse_number(cells[1], &time_val) ||
        time_val != std::floor(time_val))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": time_index must be an integer");
    const long time = static_cast<long>(time_val);

    if (rows.find(subject) == rows.end()) subject_order.push_back(subject);
    auto& times = seen_times[subject];
    auto dup = times.find(time);
    if (dup != times.end())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": duplicated (subject, time) pair also on line " +
                      std::to_string(dup->second));
    times[time] = line_no;

    Row row;
    row.time = time;
    row.y.resize(r);
    row.x.resize(p);
    bool missing = false;
    for (std::size_t c = 2; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        missing = true;
        continue;
      }
      double v = 0.0;
      if (!parse_number(cells[c], &v))
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": non-numeric cell '" + cells[c] + "' in column " +
                        header[c]);
      if (c < std::size_t(2 + r))
        row.y(c - 2) = v;
      else
        row.x(c - 2 - r) = v;
    }
    if (missing) {
      if (strict) {
        warn(path + ":" + std::to_string(line_no) +
             ": missing cell; dropping subject " + subject);
        dropped_subjects.push_back(subject);
      } else {
        warn(path + ":" + std::to_string(line_no) +
             ": missing cell; row rejected");
      }
      continue;
    }
    rows[subject].push_back(std::move(row));
  }

  std::vector<model::Subject> subjects;
  for (const auto& id : subject_order) {
    if (std::find(dropped_subjects.begin(), dropped_subjects.end(), id) !=
        dropped_subjects.end())
      continue;
    auto& subject_rows = rows[id];
    if (subject_rows.empty()) {
      warn(path + ": subject " + id + " has no usable rows; dropped");
      continue;
    }
    std::sort(subject_rows.begin(), subject_rows.end(),
              [](const Row& a, const Row& b) { return a.time < b.time; });
    model::Subject s;
    const int times = static_cast<int>(subject_rows.size());
    s.y.resize(r, times);
    s.x.resize(p, times);
    for (int j = 0; j < times; ++j) {
      s.y.col(j) = subject_rows[j].y;
      s.x.col(j) = subject_rows[j].x;
    }
    subjects.push_back(std::move(s));
  }
  if (subjects.empty()) throw DataError(path + ": no usable subjects");
  return model::LongitudinalDataset(std::move(subjects), r, p);
}

void write_dataset(const std::string& path,
                   const model::LongitudinalDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  out << "subject_id,time_index";
  for (int k = 1; k <= data.response_dim(); ++k) out << ",y_" << k;
  for (int k = 1; k <= data.covariate_dim(); ++k) out << ",x_" << k;
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    const auto& s = data.subject(i);
    for (int j = 0; j < s.times(); ++j) {
      out << (i + 1) << ',' << (j + 1);
      for (int k = 0; k < data.response_dim(); ++k)
        out << ',' << format_double(s.y(k, j));
      for (int k = 0; k < data.covariate_dim(); ++k)
        out << ',' << format_double(s.x(k, j));
      out << "\n";
    }
  }
}

namespace {

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

void write_ground_truth(const std::string& path,
                        const simgen::GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["r"] = truth.beta.rows();
  j["p"] = truth.beta.cols();
  j["u"] = truth.gamma.cols();
  j["rho"] = truth.rho;
  if (std::isfinite(truth.nu))
    j["nu"] = truth.nu;
  else
    j["nu"] = nullptr;
  j["error_kind"] = simgen::error_kind_name(truth.error_kind);
  nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
  for (int i = 0; i < truth.alpha.size(); ++i) alpha.push_back(truth.alpha(i));
  j["alpha"] = alpha;
  j["beta"] = matrix_to_json(truth.beta);
  j["sigma_eps"] = matrix_to_json(truth.sigma_eps);
  j["gamma"] = matrix_to_json(truth.gamma);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write truth file: " + path);
  out << j.dump(1) << "\n";
}

simgen::GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  simgen::GroundTruth truth;
  truth.rho = j.at("rho").get<double>();
  truth.nu = j.at("nu").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                  : j.at("nu").get<double>();
  truth.error_kind = simgen::parse_error_kind(j.at("error_kind"));
  const auto& alpha = j.at("alpha");
  truth.alpha.resize(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i)
    truth.alpha(i) = alpha[i].get<double>();
  truth.beta = matrix_from_json(j.at("beta"));
  truth.sigma_eps = matrix_from_json(j.at("sigma_eps"));
  truth.gamma = matrix_from_json(j.at("gamma"));
  return truth;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) {
      double v = 0.0;
      if (!parse_number(cell, &v))
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": non-numeric cell '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  return m;
}

}  // namespace rolem::io
