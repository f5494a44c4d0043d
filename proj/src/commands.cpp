#include "rolem/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rolem/dataset_io.hpp"
#include "rolem/inference.hpp"
#include "rolem/sampler.hpp"
#include "rolem/simgen.hpp"

namespace rolem::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using model::ErrorModel;
using model::LongitudinalDataset;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

ErrorModel parse_error_model(const std::string& name) {
  if (name == "t") return ErrorModel::T;
  if (name == "normal") return ErrorModel::Normal;
  throw InvalidParameterError("error model must be 't' or 'normal'");
}

sampler::PriorSpec make_prior(const FitConfig& config, int r, int p, int u) {
  sampler::PriorSpec prior;
  prior.xi = Eigen::MatrixXd::Zero(r, p);
  prior.h = config.h_scale * Eigen::MatrixXd::Identity(p, p);
  prior.k = u + 1;
  prior.psi = config.psi_scale * Eigen::MatrixXd::Identity(u, u);
  prior.k0 = r - u + 1;
  prior.psi0 = config.psi0_scale * Eigen::MatrixXd::Identity(r - u, r - u);
  if (config.m_file.empty()) {
    prior.m_prior = config.m_scale * Eigen::MatrixXd::Identity(r, r);
  } else {
    prior.m_prior = io::read_matrix_csv(config.m_file);
    if (prior.m_prior.rows() != r || prior.m_prior.cols() != r)
      throw DataError("prior M matrix must be r x r");
  }
  prior.a = config.a;
  prior.b = config.b;
  prior.error_model = parse_error_model(config.error_model);
  return prior;
}

sampler::TuningSpec make_tuning(const FitConfig& config) {
  sampler::TuningSpec tuning;
  tuning.delta_rho = config.delta_rho;
  tuning.delta_nu = config.delta_nu;
  tuning.sigma2_p = config.sigma2_p;
  tuning.burn_in = config.burn_in;
  tuning.n_samples = config.n_samples;
  tuning.thin = config.thin;
  tuning.seed = config.seed;
  tuning.auto_tune = config.auto_tune;
  return tuning;
}

struct Standardization {
  Eigen::VectorXd y_mean, y_sd, x_mean, x_sd;
};

Standardization standardize_in_place(LongitudinalDataset* data) {
  const int r = data->response_dim();
  const int p = data->covariate_dim();
  const long total = data->total_times();
  Standardization s;
  s.y_mean = Eigen::VectorXd::Zero(r);
  s.x_mean = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd y_sq = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd x_sq = Eigen::VectorXd::Zero(p);
  for (const auto& sub : data->subjects()) {
    s.y_mean += sub.y.rowwise().sum();
    s.x_mean += sub.x.rowwise().sum();
    y_sq += sub.y.array().square().matrix().rowwise().sum();
    x_sq += sub.x.array().square().matrix().rowwise().sum();
  }
  s.y_mean /= total;
  s.x_mean /= total;
  auto finish_sd = [&](const Eigen::VectorXd& sq, const Eigen::VectorXd& mean) {
    Eigen::VectorXd var =
        (sq - total * mean.cwiseProduct(mean)) / std::max<long>(total - 1, 1);
    Eigen::VectorXd sd = var.cwiseMax(0.0).cwiseSqrt();
    for (int i = 0; i < sd.size(); ++i)
      if (!(sd(i) > 0.0)) sd(i) = 1.0;
    return sd;
  };
  s.y_sd = finish_sd(y_sq, s.y_mean);
  s.x_sd = finish_sd(x_sq, s.x_mean);

  std::vector<Eigen::MatrixXd> new_y;
  std::vector<model::Subject> transformed;
  for (const auto& sub : data->subjects()) {
    model::Subject t = sub;
    t.y = (sub.y.colwise() - s.y_mean).array().colwise() / s.y_sd.array();
    t.x = (sub.x.colwise() - s.x_mean).array().colwise() / s.x_sd.array();
    transformed.push_back(std::move(t));
  }
  *data = LongitudinalDataset(std::move(transformed), r, p);
  return s;
}

std::vector<std::string> draw_columns(int r, int p, int u, bool normal_mode) {
  std::vector<std::string> cols;
  auto add = [&](const std::string& s) { cols.push_back(s); };
  for (int i = 1; i <= r; ++i) add("alpha_" + std::to_string(i));
  for (int i = 1; i <= u; ++i)
    for (int j = 1; j <= p; ++j)
      add("eta_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= r - u; ++i)
    for (int j = 1; j <= u; ++j)
      add("A_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= u; ++i)
    for (int j = 1; j <= i; ++j)
      add("omega_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= r - u; ++i)
    for (int j = 1; j <= i; ++j)
      add("omega0_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= r; ++i)
    for (int j = 1; j <= p; ++j)
      add("beta_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 1; i <= r; ++i)
    for (int j = 1; j <= i; ++j)
      add("sigma_" + std::to_string(i) + "_" + std::to_string(j));
  add("rho");
  if (!normal_mode) add("nu");
  add("loglik");
  return cols;
}

std::vector<double> flatten_draw(const sampler::Draw& d, bool normal_mode) {
  std::vector<double> v;
  auto push_matrix = [&](const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  };
  auto push_lower = [&](const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j <= i; ++j) v.push_back(m(i, j));
  };
  for (int i = 0; i < d.alpha.size(); ++i) v.push_back(d.alpha(i));
  push_matrix(d.eta);
  push_matrix(d.a_coord);
  push_lower(d.omega);
  push_lower(d.omega0);
  push_matrix(d.beta);
  push_lower(d.sigma_eps);
  v.push_back(d.rho);
  if (!normal_mode) v.push_back(d.nu);
  v.push_back(d.loglik);
  return v;
}

void write_draws_csv(const std::string& path,
                     const std::vector<sampler::ChainOutput>& chains,
                     const std::vector<std::string>& columns,
                     bool normal_mode) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "chain,draw";
  for (const auto& c : columns) out << ',' << c;
  out << "\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t s = 0; s < chains[c].draws.size(); ++s) {
      out << (c + 1) << ',' << (s + 1);
      for (double v : flatten_draw(chains[c].draws[s], normal_mode))
        out << ',' << io::format_double(v);
      out << "\n";
    }
  }
}

void write_pointwise_csv(const std::string& path,
                         const std::vector<sampler::ChainOutput>& chains) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const int n =
      chains.empty() || chains[0].draws.empty()
          ? 0
          : static_cast<int>(chains[0].draws[0].pointwise.size());
  out << "chain,draw";
  for (int i = 1; i <= n; ++i) out << ",logp_" << i;
  out << "\n";
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t s = 0; s < chains[c].draws.size(); ++s) {
      out << (c + 1) << ',' << (s + 1);
      const auto& pw = chains[c].draws[s].pointwise;
      for (int i = 0; i < pw.size(); ++i)
        out << ',' << io::format_double(pw(i));
      out << "\n";
    }
}

// Splits "beta_2_3" into ("beta", "2_3"); scalars get an empty index.
std::pair<std::string, std::string> split_parameter(const std::string& col) {
  const auto pos = col.find('_');
  if (pos == std::string::npos) return {col, ""};
  return {col.substr(0, pos), col.substr(pos + 1)};
}

void write_summary_csv(const std::string& path, const Table& table,
                       double level) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "parameter,index,mean,hpd_lower,hpd_upper,ess\n";
  const int chain_col = table.column("chain");
  std::vector<std::vector<int>> chain_rows;
  if (chain_col >= 0) {
    std::vector<double> ids = table.series(chain_col);
    std::vector<double> uniq = ids;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    chain_rows.resize(uniq.size());
    for (std::size_t row = 0; row < ids.size(); ++row) {
      const auto it = std::lower_bound(uniq.begin(), uniq.end(), ids[row]);
      chain_rows[it - uniq.begin()].push_back(static_cast<int>(row));
    }
  } else {
    chain_rows.emplace_back(table.values.rows());
    std::iota(chain_rows.back().begin(), chain_rows.back().end(), 0);
  }

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string& col = table.columns[c];
    if (col == "chain" || col == "draw") continue;
    std::vector<double> pooled = table.series(static_cast<int>(c));
    const double mean =
        std::accumulate(pooled.begin(), pooled.end(), 0.0) / pooled.size();
    double lo = kNan, hi = kNan;
    if (pooled.size() >= 20) {
      auto interval = inference::hpd_interval(pooled, level);
      lo = interval.first;
      hi = interval.second;
    }
    double ess = 0.0;
    for (const auto& rows : chain_rows) {
      std::vector<double> series;
      series.reserve(rows.size());
      for (int rrow : rows) series.push_back(table.values(rrow, c));
      if (series.size() >= 2)
        ess += inference::effective_sample_size(series);
      else
        ess += static_cast<double>(series.size());
    }
    auto [name, index] = split_parameter(col);
    out << name << ',' << index << ',' << io::format_double(mean) << ','
        << io::format_double(lo) << ',' << io::format_double(hi) << ','
        << io::format_double(ess) << "\n";
  }
}

void write_diagnostics_csv(const std::string& path, const Table& table,
                           const std::vector<sampler::ChainOutput>* chains) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "metric,parameter,lag,value\n";
  if (chains) {
    long nu_acc = 0, nu_att = 0, p_acc = 0, p_att = 0, rho_acc = 0,
         rho_att = 0, failures = 0;
    for (const auto& c : *chains) {
      nu_acc += c.accept_nu.accepted;
      nu_att += c.accept_nu.attempted;
      p_acc += c.accept_p.accepted;
      p_att += c.accept_p.attempted;
      rho_acc += c.accept_rho.accepted;
      rho_att += c.accept_rho.attempted;
      failures += c.frame_failures;
    }
    auto rate = [](long acc, long att) {
      return att > 0 ? double(acc) / att : kNan;
    };
    out << "acceptance_rate,nu,," << io::format_double(rate(nu_acc, nu_att))
        << "\n";
    out << "acceptance_rate,projection,,"
        << io::format_double(rate(p_acc, p_att)) << "\n";
    out << "acceptance_rate,rho,,"
        << io::format_double(rate(rho_acc, rho_att)) << "\n";
    out << "frame_failures,projection,," << failures << "\n";
  }

  const int chain_col = table.column("chain");
  const char* tracked[] = {"rho", "nu", "loglik", "A_1_1", "eta_1_1"};
  for (const char* name : tracked) {
    const int col = table.column(name);
    if (col < 0) continue;
    std::vector<double> series = table.series(col);
    if (series.size() < 4) continue;
    auto diag = inference::series_diagnostics(series);
    out << "ess," << name << ",," << io::format_double(diag.ess) << "\n";
    for (int k = 0; k < diag.acf.size(); ++k)
      out << "autocorr," << name << ',' << (k + 1) << ','
          << io::format_double(diag.acf(k)) << "\n";
    if (chain_col >= 0) {
      std::vector<std::vector<double>> per_chain;
      std::vector<double> ids = table.series(chain_col);
      for (std::size_t row = 0; row < ids.size(); ++row) {
        const std::size_t c = static_cast<std::size_t>(ids[row]) - 1;
        if (per_chain.size() <= c) per_chain.resize(c + 1);
        per_chain[c].push_back(table.values(row, col));
      }
      if (per_chain.size() > 1 && per_chain[0].size() >= 4)
        out << "rhat," << name << ",,"
            << io::format_double(inference::split_rhat(per_chain)) << "\n";
    }
  }
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json fit_config_json(const FitConfig& c) {
  json j;
  j["data_path"] = c.data_path;
  j["u"] = c.u;
  j["corr"] = c.corr;
  j["error_model"] = c.error_model;
  j["h_scale"] = c.h_scale;
  j["psi_scale"] = c.psi_scale;
  j["psi0_scale"] = c.psi0_scale;
  j["m_scale"] = c.m_scale;
  j["m_file"] = c.m_file;
  j["a"] = c.a;
  j["b"] = c.b;
  j["delta_rho"] = c.delta_rho;
  j["delta_nu"] = c.delta_nu;
  j["sigma2_p"] = c.sigma2_p;
  j["burn_in"] = c.burn_in;
  j["n_samples"] = c.n_samples;
  j["thin"] = c.thin;
  j["auto_tune"] = c.auto_tune;
  j["seed"] = c.seed;
  j["chains"] = c.chains;
  j["frame"] = c.frame;
  j["standardize"] = c.standardize;
  j["strict"] = c.strict;
  j["out_dir"] = c.out_dir;
  return j;
}

Eigen::MatrixXd gamma_from_a(const Eigen::MatrixXd& frame,
                             const Eigen::MatrixXd& a) {
  const int u = static_cast<int>(a.cols());
  const int r = static_cast<int>(frame.rows());
  return (frame.leftCols(u) + frame.rightCols(r - u) * a) *
         grassmann::inv_sqrt_spd(Eigen::MatrixXd::Identity(u, u) +
                                 a.transpose() * a);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::series(int col) const {
  std::vector<double> out(values.rows());
  for (int i = 0; i < values.rows(); ++i) out[i] = values(i, col);
  return out;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table table;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::vector<std::string> raw;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() + cell.size() && !cell.empty()
                        ? v
                        : kNan);
      raw.push_back(cell);
    }
    if (raw.size() + 1 == table.columns.size()) {
      // Trailing empty cell.
      row.push_back(kNan);
      raw.push_back("");
    }
    if (raw.size() != table.columns.size())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": wrong cell count");
    rows.push_back(std::move(row));
    table.cells.push_back(std::move(raw));
  }
  table.values.resize(rows.size(), table.columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(i, j) = rows[i][j];
  return table;
}

void cmd_fit(const FitConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> warnings;
  LongitudinalDataset data = io::ingest(config.data_path, config.strict,
                                        &warnings);
  warn_all(warnings);

  std::optional<Standardization> standardization;
  if (config.standardize) standardization = standardize_in_place(&data);

  const int r = data.response_dim();
  const int p = data.covariate_dim();
  if (config.u < 1 || config.u > r - 1)
    throw InvalidParameterError("u must satisfy 1 <= u <= r - 1");
  const corr::Kind kind = corr::parse_kind(config.corr);
  const sampler::PriorSpec prior = make_prior(config, r, p, config.u);
  const sampler::TuningSpec tuning = make_tuning(config);
  const bool normal_mode = prior.error_model == ErrorModel::Normal;

  Eigen::MatrixXd frame;  // empty selects the QR default inside run_chain
  if (config.frame == "identity") {
    frame = Eigen::MatrixXd::Identity(r, r);
  } else if (config.frame == "two-pass") {
    Rng rng(derive_seed(config.seed, 0x7061737331ULL));
    sampler::ChainOutput pass1 =
        sampler::run_chain(data, config.u, kind, prior, tuning, {}, rng);
    Eigen::MatrixXd p_mean = Eigen::MatrixXd::Zero(r, r);
    for (const auto& d : pass1.draws) {
      Eigen::MatrixXd gamma = gamma_from_a(pass1.frame, d.a_coord);
      p_mean += gamma * gamma.transpose();
    }
    p_mean /= static_cast<double>(pass1.draws.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (p_mean + p_mean.transpose()));
    frame = eig.eigenvectors().rowwise().reverse();
  } else if (config.frame != "qr") {
    throw InvalidParameterError("frame must be qr, identity, or two-pass");
  }

  std::vector<sampler::ChainOutput> chains;
  for (int c = 0; c < std::max(config.chains, 1); ++c) {
    Rng rng(derive_seed(config.seed, c));
    chains.push_back(sampler::run_chain(data, config.u, kind, prior, tuning,
                                        frame, rng));
  }

  fs::create_directories(config.out_dir);
  const auto out = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };
  const auto columns = draw_columns(r, p, config.u, normal_mode);
  write_draws_csv(out("draws.csv"), chains, columns, normal_mode);
  write_pointwise_csv(out("pointwise.csv"), chains);

  Table table = read_table(out("draws.csv"));
  write_summary_csv(out("summary.csv"), table, 0.95);
  write_diagnostics_csv(out("diagnostics.csv"), table, &chains);

  // Scores over pooled chains.
  std::vector<double> logliks;
  std::vector<Eigen::VectorXd> pointwise_rows;
  for (const auto& c : chains)
    for (const auto& d : c.draws) {
      logliks.push_back(d.loglik);
      pointwise_rows.push_back(d.pointwise);
    }
  const int p_bic = inference::bic_parameter_count(r, p, config.u,
                                                   normal_mode);
  const double bic_value = inference::bic(logliks, p_bic, data.n());
  inference::WaicResult waic_result{kNan, kNan, kNan};
  if (pointwise_rows.size() >= 2) {
    Eigen::MatrixXd pw(pointwise_rows.size(), data.n());
    for (std::size_t i = 0; i < pointwise_rows.size(); ++i)
      pw.row(i) = pointwise_rows[i].transpose();
    waic_result = inference::waic(pw);
  }
  {
    std::ofstream sc(out("scores.csv"));
    if (!sc) throw DataError("cannot write scores.csv");
    sc << "bic,waic,lppd,p_waic,max_loglik,p_bic\n";
    sc << io::format_double(bic_value) << ','
       << io::format_double(waic_result.waic) << ','
       << io::format_double(waic_result.lppd) << ','
       << io::format_double(waic_result.p_waic) << ','
       << io::format_double(
              *std::max_element(logliks.begin(), logliks.end()))
       << ',' << p_bic << "\n";
  }

  json manifest;
  manifest["command"] = "fit";
  manifest["config"] = fit_config_json(config);
  manifest["data"] = {{"r", r}, {"p", p}, {"n", data.n()},
                      {"total_times", data.total_times()}};
  manifest["mode"] = normal_mode ? "normal" : "t";
  manifest["frame_matrix"] = matrix_json(chains.front().frame);
  json acc = json::array();
  json tuned = json::array();
  for (const auto& c : chains) {
    acc.push_back({{"nu", c.accept_nu.rate()},
                   {"projection", c.accept_p.rate()},
                   {"rho", c.accept_rho.rate()},
                   {"frame_failures", c.frame_failures}});
    tuned.push_back({{"delta_rho", c.tuning_final.delta_rho},
                     {"delta_nu", c.tuning_final.delta_nu},
                     {"sigma2_p", c.tuning_final.sigma2_p}});
  }
  manifest["acceptance"] = acc;
  manifest["tuning_final"] = tuned;
  if (standardization) {
    manifest["standardization"] = {
        {"y_mean", vector_json(standardization->y_mean)},
        {"y_sd", vector_json(standardization->y_sd)},
        {"x_mean", vector_json(standardization->x_mean)},
        {"x_sd", vector_json(standardization->x_sd)}};
  } else {
    manifest["standardization"] = nullptr;
  }
  manifest["outputs"] = {"draws.csv", "pointwise.csv", "summary.csv",
                         "diagnostics.csv", "scores.csv"};
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ofstream mf(out("manifest.json"));
  mf << manifest.dump(1) << "\n";
}

void cmd_simulate(const SimulateConfig& config_in) {
  SimulateConfig config = config_in;
  if (config.preset == "paper-5.1") {
    config.r = 20;
    config.p = 30;
    config.u = 3;
    config.rho = 0.5;
    config.corr = "ar1";
    config.error_kind = "t4";
  } else if (!config.preset.empty()) {
    throw InvalidParameterError("unknown preset: " + config.preset);
  }

  simgen::SimDesign design;
  design.r = config.r;
  design.p = config.p;
  design.u = config.u;
  design.n = config.n;
  design.j = config.j;
  design.rho_true = config.rho;
  design.corr_kind = corr::parse_kind(config.corr);
  design.error_kind = simgen::parse_error_kind(config.error_kind);
  if (config.structured_a)
    design.fixed_a = simgen::structured_design_a(config.r, config.u);

  Rng rng(config.seed);
  auto [data, truth] = simgen::generate(design, rng);
  const std::string data_path = config.out_prefix + "_data.csv";
  const std::string truth_path = config.out_prefix + "_truth.json";
  io::write_dataset(data_path, data);
  io::write_ground_truth(truth_path, truth);

  json manifest;
  manifest["command"] = "simulate";
  json cfg;
  cfg["preset"] = config.preset;
  cfg["r"] = config.r;
  cfg["p"] = config.p;
  cfg["u"] = config.u;
  cfg["n"] = config.n;
  cfg["j"] = config.j;
  cfg["rho"] = config.rho;
  cfg["corr"] = config.corr;
  cfg["error_kind"] = config.error_kind;
  cfg["structured_a"] = config.structured_a;
  cfg["seed"] = config.seed;
  cfg["out_prefix"] = config.out_prefix;
  manifest["config"] = cfg;
  if (design.error_kind == simgen::ErrorKind::T4) {
    manifest["error_detail"] = {{"kind", "t4"}, {"nu", 4.0}};
  } else if (design.error_kind == simgen::ErrorKind::NormalVar2) {
    manifest["error_detail"] = {{"kind", "normal"}, {"variance", 2.0}};
  } else {
    manifest["error_detail"] = {{"kind", "mixture"},
                                {"weights", {0.9, 0.1}},
                                {"variances", {1.0, 11.0}}};
  }
  manifest["outputs"] = {data_path, truth_path};
  std::ofstream mf(config.out_prefix + "_manifest.json");
  mf << manifest.dump(1) << "\n";
}

void cmd_select(const SelectConfig& config) {
  std::vector<std::string> warnings;
  LongitudinalDataset data =
      io::ingest(config.fit.data_path, config.fit.strict, &warnings);
  warn_all(warnings);
  if (config.fit.standardize) standardize_in_place(&data);

  const int r = data.response_dim();
  const int p = data.covariate_dim();
  std::vector<int> u_grid =
      config.u_grid.empty() ? std::vector<int>{config.fit.u} : config.u_grid;
  std::vector<std::string> corr_grid =
      config.corr_grid.empty() ? std::vector<std::string>{config.fit.corr}
                               : config.corr_grid;
  if (config.criterion != "bic" && config.criterion != "waic")
    throw InvalidParameterError("criterion must be bic or waic");

  struct Candidate {
    int u;
    std::string corr;
    double bic = kNan, waic = kNan, p_waic = kNan;
    int p_bic = 0;
    bool ok = false;
    std::string error;
  };
  std::vector<Candidate> candidates;
  for (int u : u_grid)
    for (const auto& ck : corr_grid) {
      Candidate cand;
      cand.u = u;
      cand.corr = ck;
      candidates.push_back(std::move(cand));
    }

  const bool normal_mode = config.fit.error_model == "normal";
  auto run_candidate = [&](std::size_t idx) {
    Candidate& cand = candidates[idx];
    try {
      FitConfig fc = config.fit;
      fc.u = cand.u;
      fc.corr = cand.corr;
      const sampler::PriorSpec prior = make_prior(fc, r, p, cand.u);
      sampler::TuningSpec tuning = make_tuning(fc);
      Rng rng(derive_seed(config.fit.seed, idx));
      sampler::ChainOutput chain =
          sampler::run_chain(data, cand.u, corr::parse_kind(cand.corr), prior,
                             tuning, {}, rng);
      std::vector<double> logliks;
      Eigen::MatrixXd pw(chain.draws.size(), data.n());
      for (std::size_t s = 0; s < chain.draws.size(); ++s) {
        logliks.push_back(chain.draws[s].loglik);
        pw.row(s) = chain.draws[s].pointwise.transpose();
      }
      cand.p_bic = inference::bic_parameter_count(r, p, cand.u, normal_mode);
      cand.bic = inference::bic(logliks, cand.p_bic, data.n());
      auto w = inference::waic(pw);
      cand.waic = w.waic;
      cand.p_waic = w.p_waic;
      cand.ok = true;
    } catch (const std::exception& e) {
      cand.error = e.what();
    }
  };

  const int workers = std::max(config.workers, 1);
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= candidates.size()) return;
        idx = next++;
      }
      run_candidate(idx);
    }
  };
  if (workers == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) run_candidate(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double best_bic = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates)
    if (c.ok) best_bic = std::min(best_bic, c.bic);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    const auto& ca = candidates[a];
    const auto& cb = candidates[b];
    if (ca.ok != cb.ok) return ca.ok;
    const double va = config.criterion == "bic" ? ca.bic : ca.waic;
    const double vb = config.criterion == "bic" ? cb.bic : cb.waic;
    return va < vb;
  });

  fs::create_directories(config.out_dir);
  const std::string table_path =
      (fs::path(config.out_dir) / "selection.csv").string();
  std::ofstream out(table_path);
  if (!out) throw DataError("cannot write " + table_path);
  out << "u,corr,bic,waic,p_bic,p_waic,bayes_factor,status\n";
  for (std::size_t idx : order) {
    const auto& c = candidates[idx];
    out << c.u << ',' << c.corr << ',' << io::format_double(c.bic) << ','
        << io::format_double(c.waic) << ',' << c.p_bic << ','
        << io::format_double(c.p_waic) << ','
        << io::format_double(c.ok ? std::exp(-(c.bic - best_bic) / 2.0)
                                  : kNan)
        << ',' << (c.ok ? "ok" : "failed") << "\n";
  }
  out.close();

  json manifest;
  manifest["command"] = "select";
  manifest["config"] = fit_config_json(config.fit);
  manifest["config"]["u_grid"] = u_grid;
  manifest["config"]["corr_grid"] = corr_grid;
  manifest["config"]["criterion"] = config.criterion;
  manifest["config"]["workers"] = config.workers;
  manifest["config"]["out_dir"] = config.out_dir;
  json failures = json::array();
  for (const auto& c : candidates)
    if (!c.ok)
      failures.push_back({{"u", c.u}, {"corr", c.corr}, {"error", c.error}});
  manifest["failures"] = failures;
  manifest["outputs"] = {"selection.csv"};
  std::ofstream mf((fs::path(config.out_dir) / "manifest.json").string());
  mf << manifest.dump(1) << "\n";
}

void cmd_score(const ScoreConfig& config) {
  if (config.fit_dirs.empty() ||
      config.fit_dirs.size() != config.truth_files.size())
    throw InvalidParameterError(
        "score needs matching --fit-dir/--truth pairs");

  std::ofstream out(config.out_path);
  if (!out) throw DataError("cannot write " + config.out_path);
  out << "replicate,metric,i,j,value\n";

  long covered = 0, total_entries = 0;
  for (std::size_t rep = 0; rep < config.fit_dirs.size(); ++rep) {
    const simgen::GroundTruth truth =
        io::read_ground_truth(config.truth_files[rep]);
    const int r = static_cast<int>(truth.beta.rows());
    const int p = static_cast<int>(truth.beta.cols());
    Table table = read_table(
        (fs::path(config.fit_dirs[rep]) / "draws.csv").string());

    Eigen::MatrixXd beta_mean(r, p);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < p; ++j) {
        const int col = table.column("beta_" + std::to_string(i + 1) + "_" +
                                     std::to_string(j + 1));
        if (col < 0)
          throw DataError("draws file lacks beta_" + std::to_string(i + 1) +
                          "_" + std::to_string(j + 1) +
                          "; dimensions do not match the truth file");
        beta_mean(i, j) =
            table.values.col(col).mean();
      }
    Eigen::MatrixXd sigma_mean(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j <= i; ++j) {
        const int col = table.column("sigma_" + std::to_string(i + 1) + "_" +
                                     std::to_string(j + 1));
        if (col < 0) throw DataError("draws file lacks sigma entries");
        sigma_mean(i, j) = table.values.col(col).mean();
        sigma_mean(j, i) = sigma_mean(i, j);
      }

    out << (rep + 1) << ",frobenius_beta,0,0,"
        << io::format_double(inference::frobenius_error(beta_mean, truth.beta))
        << "\n";
    out << (rep + 1) << ",frobenius_sigma_eps,0,0,"
        << io::format_double(
               inference::frobenius_error(sigma_mean, truth.sigma_eps))
        << "\n";

    for (int i = 0; i < r; ++i)
      for (int j = 0; j < p; ++j) {
        const int col = table.column("beta_" + std::to_string(i + 1) + "_" +
                                     std::to_string(j + 1));
        auto interval =
            inference::hpd_interval(table.series(col), config.level);
        const int cover = truth.beta(i, j) >= interval.first &&
                                  truth.beta(i, j) <= interval.second
                              ? 1
                              : 0;
        covered += cover;
        ++total_entries;
        out << (rep + 1) << ",hpd_length_beta," << (i + 1) << ',' << (j + 1)
            << ',' << io::format_double(interval.second - interval.first)
            << "\n";
        out << (rep + 1) << ",coverage_beta," << (i + 1) << ',' << (j + 1)
            << ',' << cover << "\n";
      }
  }

  if (config.fit_dirs.size() > 1) {
    const double mean = double(covered) / total_entries;
    auto ci = inference::wilson_interval(covered, total_entries);
    out << "0,coverage_mean,0,0," << io::format_double(mean) << "\n";
    out << "0,coverage_ci_lower,0,0," << io::format_double(ci.first) << "\n";
    out << "0,coverage_ci_upper,0,0," << io::format_double(ci.second) << "\n";
  }
}

void cmd_summarize(const SummarizeConfig& config) {
  Table table = read_table(config.draws_path);
  fs::create_directories(config.out_dir);
  write_summary_csv((fs::path(config.out_dir) / "summary.csv").string(),
                    table, config.level);
  write_diagnostics_csv(
      (fs::path(config.out_dir) / "diagnostics.csv").string(), table,
      nullptr);
}

}  // namespace rolem::cli
