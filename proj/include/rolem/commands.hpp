#ifndef ROLEM_COMMANDS_HPP
#define ROLEM_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rolem/model.hpp"

namespace rolem::cli {

// Shared sampler settings a fit-like command needs.  Prior matrices follow
// the scalar-scale convention (xi = 0, H = h_scale I, Psi = psi_scale I,
// M = m_scale I unless m_file supplies a full matrix).
struct FitConfig {
  std::string data_path;
  int u = 1;
  std::string corr = "ar1";
  std::string error_model = "t";  // "t" | "normal"

  double h_scale = 1e-3;
  double psi_scale = 1e-3;
  double psi0_scale = 1e-3;
  double m_scale = 1e-3;
  std::string m_file;
  double a = 1.4;
  double b = 0.04;

  double delta_rho = 0.1;
  double delta_nu = 2.0;
  double sigma2_p = 0.1;
  int burn_in = 2000;
  int n_samples = 5000;
  int thin = 5;
  bool auto_tune = true;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string frame = "qr";  // qr | identity | two-pass
  bool standardize = false;
  bool strict = false;
  std::string out_dir = "fit_out";
};

struct SimulateConfig {
  std::string preset;  // "" | "paper-5.1"
  int r = 20;
  int p = 30;
  int u = 3;
  int n = 100;
  int j = 5;
  double rho = 0.5;
  std::string corr = "ar1";
  std::string error_kind = "t4";  // t4 | normal | mixture
  bool structured_a = false;
  std::uint64_t seed = 1;
  std::string out_prefix = "sim";
};

struct SelectConfig {
  FitConfig fit;
  std::vector<int> u_grid;
  std::vector<std::string> corr_grid;
  std::string criterion = "bic";  // bic | waic
  int workers = 1;
  std::string out_dir = "select_out";
};

struct ScoreConfig {
  std::vector<std::string> fit_dirs;
  std::vector<std::string> truth_files;
  double level = 0.95;
  std::string out_path = "metrics.csv";
};

struct SummarizeConfig {
  std::string draws_path;
  double level = 0.95;
  std::string out_dir = "summary_out";
};

void cmd_fit(const FitConfig& config);
void cmd_simulate(const SimulateConfig& config);
void cmd_select(const SelectConfig& config);
void cmd_score(const ScoreConfig& config);
void cmd_summarize(const SummarizeConfig& config);

// Parsed table with named columns (draws files and the like).  Numeric
// cells land in `values`; anything else is NaN there but kept in `cells`.
struct Table {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::vector<std::vector<std::string>> cells;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> series(int col) const;
};

Table read_table(const std::string& path);

}  // namespace rolem::cli

#endif  // ROLEM_COMMANDS_HPP
