#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "stgp/diagnostics.hpp"
#include "stgp/io.hpp"
#include "stgp/simlab.hpp"
#include "stgp/survey.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<std::string, double> truth_params(const stgp::SimScenario& sc) {
  std::map<std::string, double> p = {
      {"a", sc.a},       {"delta", sc.delta}, {"d2", sc.d2},
      {"sigma2", sc.sigma2}, {"nu", sc.nu},
  };
  for (int c = 0; c < sc.beta_raw.size(); ++c) {
    const double norm = sc.beta_raw.norm();
    p["beta" + std::to_string(c + 1)] = sc.beta_raw[c] / norm;
  }
  return p;
}

int cmd_simulate(const std::string& scenario, int n, std::uint64_t seed,
                 const std::string& out) {
  stgp::SimScenario sc;
  sc.N = n;
  if (scenario == "sim1")
    sc.which = stgp::Scenario::Sim1;
  else if (scenario == "sim2")
    sc.which = stgp::Scenario::Sim2;
  else if (scenario == "sim3")
    sc.which = stgp::Scenario::Sim3;
  else
    throw std::runtime_error("unknown scenario '" + scenario + "'");

  stgp::Config audit_cfg;
  audit_cfg.kv["scenario"] = scenario;
  audit_cfg.kv["n"] = std::to_string(n);
  const std::string audit = stgp::audit_line(seed, stgp::config_hash(audit_cfg));

  stgp::Rng rng(seed);
  stgp::PanelDataset data;
  if (sc.which == stgp::Scenario::Sim1) {
    data = stgp::gen_sim1(sc, rng);
  } else {
    const stgp::SimSelection sel =
        sc.which == stgp::Scenario::Sim2 ? stgp::gen_sim2(sc, rng) : stgp::gen_sim3(sc, rng);
    data = sel.sample;
    std::cout << "selected " << data.N() << " of " << sel.population.N() << " subjects\n";
  }
  stgp::save_dataset(out, data, audit);
  stgp::save_truth(out + ".truth.csv", truth_params(sc), audit);
  std::cout << "wrote " << out << " (" << data.N() << " subjects) and " << out
            << ".truth.csv\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& config_path, int prs_J,
            const std::string& variant, std::uint64_t seed, bool seed_given, int threads,
            const std::string& out_dir) {
  const auto t0 = Clock::now();
  stgp::Config cfg = config_path.empty() ? stgp::Config{} : stgp::load_config(config_path);
  if (seed_given) cfg.kv["seed"] = std::to_string(seed);
  if (!variant.empty()) cfg.kv["variant"] = variant;
  const stgp::FitConfig fc = stgp::fit_config_from(cfg);
  const std::uint64_t hash = stgp::config_hash(cfg);
  const std::string audit = stgp::audit_line(fc.seed, hash);

  stgp::PanelDataset data = stgp::load_dataset(data_path);
  stgp::apply_column_structure(cfg, data);

  stgp::PosteriorDraws draws;
  if (prs_J > 0) {
    draws = stgp::mcmc_prs(data, fc, prs_J, threads);
  } else {
    stgp::Rng rng(fc.seed);
    draws = stgp::run_chain(data, fc, rng);
  }
  stgp::save_draws(out_dir + "/draws.csv", draws, audit);
  stgp::save_loglik(out_dir + "/loglik.csv", draws.loglik, audit);

  char hashbuf[32];
  std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                static_cast<unsigned long long>(hash));
  std::cout << "seed          " << fc.seed << "\n"
            << "config_hash   " << hashbuf << "\n"
            << "subjects      " << data.N() << "\n"
            << "retained      " << draws.num_draws() << "\n"
            << "slice_evals   " << draws.ess_target_evals << "\n"
            << "elapsed_sec   " << seconds_since(t0) << "\n"
            << "wrote         " << out_dir << "/draws.csv, " << out_dir << "/loglik.csv\n";
  return 0;
}

int cmd_resample(const std::string& data_path, long pop_size, std::uint64_t seed, int reps,
                 const std::string& out) {
  const stgp::PanelDataset data = stgp::load_dataset(data_path, /*scale=*/false);
  stgp::WeightedSample sample;
  sample.population_size = pop_size;
  for (const auto& s : data.subjects) {
    sample.items.push_back(s.id);
  }
  sample.weights.resize(data.N());
  for (int i = 0; i < data.N(); ++i) sample.weights[i] = data.subjects[i].weight;
  sample.rescale_weights();
  sample.validate();

  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  stgp::Config audit_cfg;
  audit_cfg.kv["pop_size"] = std::to_string(pop_size);
  audit_cfg.kv["reps"] = std::to_string(reps);
  os << stgp::audit_line(seed, stgp::config_hash(audit_cfg)) << "\n";
  os << "replicate,subject_id\n";
  for (int r = 0; r < reps; ++r) {
    stgp::Rng rng = stgp::Rng::derive(seed, r + 1);
    for (const auto& id : stgp::wfpbb(sample, rng)) os << (r + 1) << "," << id << "\n";
  }
  std::cout << "wrote " << out << " (" << reps << " replicates of " << data.N()
            << " subjects)\n";
  return 0;
}

int cmd_diagnose(const std::string& draws_path, const std::string& data_path, int L) {
  const stgp::PosteriorDraws draws = stgp::load_draws(draws_path);
  const stgp::PanelDataset data = stgp::load_dataset(data_path);
  const stgp::BasisSpec basis{L};

  const auto slash = draws_path.find_last_of('/');
  const std::string loglik_path =
      (slash == std::string::npos ? "" : draws_path.substr(0, slash + 1)) + "loglik.csv";
  std::ifstream ll(loglik_path);
  if (ll) {
    // reuse load_draws-free parsing: the loglik CSV is draw,subject1..subjectN
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(ll, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("draw", 0) == 0) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string tok;
      bool first = true;
      while (std::getline(ss, tok, ',')) {
        if (first) {
          first = false;
          continue;
        }
        row.push_back(std::stod(tok));
      }
      rows.push_back(std::move(row));
    }
    if (!rows.empty()) {
      Eigen::MatrixXd loglik(rows.size(), rows[0].size());
      for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) loglik(i, j) = rows[i][j];
      const stgp::WaicResult w = stgp::waic(loglik);
      std::cout << "waic     " << w.waic << "\n"
                << "p_waic   " << w.p_waic << "\n"
                << "lppd     " << w.lppd << "\n";
    }
  } else {
    std::cout << "waic     skipped (no " << loglik_path << ")\n";
  }

  const stgp::DeltaCheck dc = stgp::delta_moment_selfcheck(draws);
  if (dc.skipped)
    std::cout << "delta_check skipped: " << dc.note << "\n";
  else
    std::cout << "delta_check nu=" << dc.nu_rounded << " mean=" << dc.delta_mean
              << " recovered=" << dc.delta_recovered << " abs_error=" << dc.abs_error << "\n";

  for (const auto& r : stgp::residual_report(data, draws, basis))
    std::cout << "residual " << r.stream << " median=" << r.median << " q25=" << r.q25
              << " q75=" << r.q75 << " std_q05=" << r.std_q05 << " std_q95=" << r.std_q95
              << "\n";
  return 0;
}

int cmd_export_index(const std::string& draws_path, int grid, int L, const std::string& out) {
  const stgp::PosteriorDraws draws = stgp::load_draws(draws_path);
  const stgp::BasisSpec basis{L};
  const Eigen::MatrixXd g = stgp::index_grid(draws, basis, grid);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  stgp::Config audit_cfg;
  audit_cfg.kv["grid"] = std::to_string(grid);
  os << stgp::audit_line(0, stgp::config_hash(audit_cfg)) << "\n";
  os << "u,mean,lo_2.5,hi_97.5\n";
  char buf[40];
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < 4; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", g(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
  std::cout << "wrote " << out << " (" << g.rows() << " grid points)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stgp: skew-t single-index mixed-effects sampler"};
  app.require_subcommand(1);

  // simulate
  std::string sim_scenario = "sim1", sim_out;
  int sim_n = 100;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--scenario", sim_scenario, "sim1 | sim2 | sim3");
  sim->add_option("--n", sim_n, "subjects (sim1) or population size (sim2/sim3)");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // fit
  std::string fit_data, fit_config, fit_variant, fit_out_dir = ".";
  int fit_prs = 0, fit_threads = 1;
  std::uint64_t fit_seed = 1;
  auto* fit = app.add_subcommand("fit", "run the MCMC sampler");
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--config", fit_config, "key=value config file");
  auto* fit_prs_opt =
      fit->add_option("--prs", fit_prs, "pseudo-population resampling replicates (default 50)")
          ->expected(0, 1);
  fit->add_option("--variant", fit_variant, "st-gp | sn-gp | n-gp");
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "RNG seed (overrides config)");
  fit->add_option("--threads", fit_threads, "worker threads for --prs");
  fit->add_option("--out-dir", fit_out_dir, "output directory");

  // resample
  std::string rs_data, rs_out = "resample.csv";
  long rs_pop = 0;
  int rs_reps = 1;
  std::uint64_t rs_seed = 1;
  auto* rs = app.add_subcommand("resample", "weighted finite-population bootstrap");
  rs->add_option("--data", rs_data, "dataset CSV")->required();
  rs->add_option("--pop-size", rs_pop, "finite population size")->required();
  rs->add_option("--seed", rs_seed, "RNG seed");
  rs->add_option("--reps", rs_reps, "bootstrap replicates");
  rs->add_option("--out", rs_out, "output CSV path");

  // diagnose
  std::string dg_draws, dg_data;
  int dg_L = 25;
  auto* dg = app.add_subcommand("diagnose", "WAIC, moment self-check, residual report");
  dg->add_option("--draws", dg_draws, "draws CSV")->required();
  dg->add_option("--data", dg_data, "dataset CSV")->required();
  dg->add_option("--L", dg_L, "basis resolution used in the fit");

  // export-index
  std::string ix_draws, ix_out = "index.csv";
  int ix_grid = 1000, ix_L = 25;
  auto* ix = app.add_subcommand("export-index", "posterior index function on a grid");
  ix->add_option("--draws", ix_draws, "draws CSV")->required();
  ix->add_option("--grid", ix_grid, "grid points");
  ix->add_option("--L", ix_L, "basis resolution used in the fit");
  ix->add_option("--out", ix_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_n, sim_seed, sim_out);
    if (fit->parsed()) {
      if (fit_prs_opt->count() > 0 && fit_prs == 0) fit_prs = stgp::kDefaultPrsReplicates;
      return cmd_fit(fit_data, fit_config, fit_prs, fit_variant, fit_seed,
                     fit_seed_opt->count() > 0, fit_threads, fit_out_dir);
    }
    if (rs->parsed()) return cmd_resample(rs_data, rs_pop, rs_seed, rs_reps, rs_out);
    if (dg->parsed()) return cmd_diagnose(dg_draws, dg_data, dg_L);
    if (ix->parsed()) return cmd_export_index(ix_draws, ix_grid, ix_L, ix_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
