#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rolem/commands.hpp"
#include "rolem/errors.hpp"

namespace {

using nlohmann::json;
using namespace rolem;

// Pre-scan for --config so file values load before flag overrides; a
// manifest written by a previous run works directly (its "config" object is
// used).
json load_config_json(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw DataError(std::string("cannot open config file: ") +
                               argv[i + 1]);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw DataError(std::string("invalid config JSON: ") + e.what());
      }
      if (j.contains("config")) return j["config"];
      return j;
    }
  }
  return json::object();
}

template <typename T>
void maybe(const json& j, const char* key, T* out) {
  if (j.contains(key) && !j[key].is_null()) *out = j[key].get<T>();
}

void apply_fit_json(const json& j, cli::FitConfig* c) {
  maybe(j, "data_path", &c->data_path);
  maybe(j, "u", &c->u);
  maybe(j, "corr", &c->corr);
  maybe(j, "error_model", &c->error_model);
  maybe(j, "h_scale", &c->h_scale);
  maybe(j, "psi_scale", &c->psi_scale);
  maybe(j, "psi0_scale", &c->psi0_scale);
  maybe(j, "m_scale", &c->m_scale);
  maybe(j, "m_file", &c->m_file);
  maybe(j, "a", &c->a);
  maybe(j, "b", &c->b);
  maybe(j, "delta_rho", &c->delta_rho);
  maybe(j, "delta_nu", &c->delta_nu);
  maybe(j, "sigma2_p", &c->sigma2_p);
  maybe(j, "burn_in", &c->burn_in);
  maybe(j, "n_samples", &c->n_samples);
  maybe(j, "thin", &c->thin);
  maybe(j, "auto_tune", &c->auto_tune);
  maybe(j, "seed", &c->seed);
  maybe(j, "chains", &c->chains);
  maybe(j, "frame", &c->frame);
  maybe(j, "standardize", &c->standardize);
  maybe(j, "strict", &c->strict);
  maybe(j, "out_dir", &c->out_dir);
}

void add_fit_options(CLI::App* cmd, cli::FitConfig* c, bool with_out = true) {
  cmd->add_option("--data", c->data_path, "long-format dataset CSV");
  cmd->add_option("--u", c->u, "envelope dimension");
  cmd->add_option("--corr", c->corr, "correlation kind: uncor | cs | ar1");
  cmd->add_option("--error-model", c->error_model, "t | normal");
  cmd->add_option("--h-scale", c->h_scale, "eta prior column precision scale");
  cmd->add_option("--psi-scale", c->psi_scale, "Omega prior scale");
  cmd->add_option("--psi0-scale", c->psi0_scale, "Omega0 prior scale");
  cmd->add_option("--m-scale", c->m_scale, "Langevin prior scale (M = s I)");
  cmd->add_option("--m-file", c->m_file, "CSV file with a full r x r M");
  cmd->add_option("--a", c->a, "nu prior shape");
  cmd->add_option("--b", c->b, "nu prior rate");
  cmd->add_option("--delta-rho", c->delta_rho, "rho random-walk half width");
  cmd->add_option("--delta-nu", c->delta_nu, "nu random-walk half width");
  cmd->add_option("--sigma2-p", c->sigma2_p, "projection proposal variance");
  cmd->add_option("--burn-in", c->burn_in, "burn-in sweeps");
  cmd->add_option("--n-samples", c->n_samples, "post burn-in sweeps");
  cmd->add_option("--thin", c->thin, "keep one draw per thin sweeps");
  cmd->add_option("--auto-tune", c->auto_tune,
                  "adapt step sizes during burn-in (0/1)");
  cmd->add_option("--seed", c->seed, "random seed");
  cmd->add_option("--chains", c->chains, "number of chains");
  cmd->add_option("--frame", c->frame,
                  "reference frame: qr | identity | two-pass");
  cmd->add_flag("--standardize", c->standardize,
                "standardize responses and covariates");
  cmd->add_flag("--strict", c->strict,
                "drop whole subjects containing missing cells");
  if (with_out) cmd->add_option("--out", c->out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian robust longitudinal envelope model fitting"};
  app.require_subcommand(1);

  json config_json;
  try {
    config_json = load_config_json(argc, argv);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::string config_path;

  cli::FitConfig fit_config;
  cli::SimulateConfig sim_config;
  cli::SelectConfig select_config;
  cli::ScoreConfig score_config;
  cli::SummarizeConfig summarize_config;

  apply_fit_json(config_json, &fit_config);
  apply_fit_json(config_json, &select_config.fit);

  auto* fit = app.add_subcommand("fit", "run the sampler on a dataset");
  fit->add_option("--config", config_path, "JSON config or manifest file");
  add_fit_options(fit, &fit_config);

  auto* simulate = app.add_subcommand("simulate", "generate synthetic data");
  simulate->add_option("--config", config_path, "JSON config or manifest");
  {
    auto* c = simulate;
    auto* s = &sim_config;
    maybe(config_json, "preset", &s->preset);
    maybe(config_json, "r", &s->r);
    maybe(config_json, "p", &s->p);
    maybe(config_json, "u", &s->u);
    maybe(config_json, "n", &s->n);
    maybe(config_json, "j", &s->j);
    maybe(config_json, "rho", &s->rho);
    maybe(config_json, "corr", &s->corr);
    maybe(config_json, "error_kind", &s->error_kind);
    maybe(config_json, "structured_a", &s->structured_a);
    maybe(config_json, "seed", &s->seed);
    maybe(config_json, "out_prefix", &s->out_prefix);
    c->add_option("--preset", s->preset, "design preset: paper-5.1");
    c->add_option("--r", s->r, "responses");
    c->add_option("--p", s->p, "covariates");
    c->add_option("--u", s->u, "true envelope dimension");
    c->add_option("--n", s->n, "subjects");
    c->add_option("--J", s->j, "time points per subject");
    c->add_option("--rho", s->rho, "true correlation");
    c->add_option("--corr", s->corr, "correlation kind");
    c->add_option("--error-kind", s->error_kind, "t4 | normal | mixture");
    c->add_flag("--structured-a", s->structured_a,
                "use the fixed tiled A design");
    c->add_option("--seed", s->seed, "random seed");
    c->add_option("--out-prefix", s->out_prefix, "output file prefix");
  }

  auto* select = app.add_subcommand(
      "select", "fit a grid of candidate models and rank them");
  select->add_option("--config", config_path, "JSON config or manifest");
  add_fit_options(select, &select_config.fit, false);
  {
    if (config_json.contains("u_grid"))
      select_config.u_grid = config_json["u_grid"].get<std::vector<int>>();
    if (config_json.contains("corr_grid"))
      select_config.corr_grid =
          config_json["corr_grid"].get<std::vector<std::string>>();
    maybe(config_json, "criterion", &select_config.criterion);
    maybe(config_json, "workers", &select_config.workers);
    maybe(config_json, "out_dir", &select_config.out_dir);
    select->add_option("--u-grid", select_config.u_grid,
                       "envelope dimensions to try");
    select->add_option("--corr-grid", select_config.corr_grid,
                       "correlation kinds to try");
    select->add_option("--criterion", select_config.criterion, "bic | waic");
    select->add_option("--workers", select_config.workers,
                       "concurrent candidate fits");
    select->add_option("--out", select_config.out_dir, "output directory");
  }

  auto* score = app.add_subcommand(
      "score", "compare fit artifacts against ground truth");
  score->add_option("--fit-dir", score_config.fit_dirs,
                    "fit output directory (repeatable)");
  score->add_option("--truth", score_config.truth_files,
                    "ground-truth JSON (repeatable)");
  score->add_option("--level", score_config.level, "HPD level");
  score->add_option("--out", score_config.out_path, "metrics CSV path");

  auto* summarize = app.add_subcommand(
      "summarize", "recompute summaries from a draws file");
  summarize->add_option("--draws", summarize_config.draws_path, "draws.csv");
  summarize->add_option("--level", summarize_config.level, "HPD level");
  summarize->add_option("--out", summarize_config.out_dir,
                        "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) cli::cmd_fit(fit_config);
    if (simulate->parsed()) cli::cmd_simulate(sim_config);
    if (select->parsed()) cli::cmd_select(select_config);
    if (score->parsed()) cli::cmd_score(score_config);
    if (summarize->parsed()) cli::cmd_summarize(summarize_config);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
