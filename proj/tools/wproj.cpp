// wproj: exact Wasserstein-projection toolkit CLI.
//
// Subcommands: shadow, project, stability, holder, mapstab, rates, dim,
// smooth. Every run reads an optional JSON config (flags override fields),
// writes its resolved config next to the outputs, and exits with:
//   0  success
//   1  input/configuration error (message names the offending file/field)
//   2  a mathematical assertion failed (e.g. a certified inequality broke)

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wproj/complexity.hpp"
#include "wproj/instances.hpp"
#include "wproj/io.hpp"
#include "wproj/mot.hpp"
#include "wproj/ot.hpp"
#include "wproj/rng.hpp"
#include "wproj/shadow.hpp"
#include "wproj/stability.hpp"
#include "wproj/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wproj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAssertion = 2;

struct RunConfig {
  std::string command;
  std::string rho_path, xi_path, lambda_path;
  std::vector<std::string> mu_paths, nu_paths;
  double p = 2.0;
  double q = 1.0;
  double theta_delta = 0.01;
  double sigma = 0.1;
  double tau = 0.0;
  std::string family = "translate";
  std::vector<double> scales{0.32, 0.16, 0.08, 0.04, 0.02, 0.01};
  std::vector<double> epsilons{0.5, 0.35, 0.25, 0.18, 0.12};
  std::vector<std::size_t> n_grid{50, 100, 200, 400};
  std::vector<std::size_t> m_grid{50, 100, 200, 400};
  int trials = 20;
  int instances = 300;
  std::uint64_t seed = 1;
  int grid = 8;
  double grid_wmin = 0.75;
  double grid_wmax = 1.25;
  std::size_t support_cap = 1'000'000;
  std::size_t lp_cap = 20'000;
  std::string out_dir;
  bool svg = true;
};

double parse_p(const json& v, const std::string& field) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf" || s == "Inf" || s == "infinity" || s == "Infinity") return kInf;
    throw InputError("config field \"" + field + "\": unrecognized value " + s);
  }
  if (v.is_number()) return v.get<double>();
  throw InputError("config field \"" + field + "\" must be a number or \"inf\"");
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

void load_config_file(RunConfig& cfg, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open config " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("malformed config JSON " + file.string() + ": " + e.what());
  }
  if (j.contains("rho")) cfg.rho_path = j["rho"].get<std::string>();
  if (j.contains("xi")) cfg.xi_path = j["xi"].get<std::string>();
  if (j.contains("lambda")) cfg.lambda_path = j["lambda"].get<std::string>();
  if (j.contains("mu")) cfg.mu_paths = j["mu"].get<std::vector<std::string>>();
  if (j.contains("nu")) cfg.nu_paths = j["nu"].get<std::vector<std::string>>();
  if (j.contains("p")) cfg.p = parse_p(j["p"], "p");
  if (j.contains("q")) cfg.q = parse_p(j["q"], "q");
  if (j.contains("theta_delta")) cfg.theta_delta = j["theta_delta"].get<double>();
  if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
  if (j.contains("family")) cfg.family = j["family"].get<std::string>();
  if (j.contains("scales")) cfg.scales = j["scales"].get<std::vector<double>>();
  if (j.contains("epsilons")) cfg.epsilons = j["epsilons"].get<std::vector<double>>();
  if (j.contains("n_grid")) cfg.n_grid = j["n_grid"].get<std::vector<std::size_t>>();
  if (j.contains("m_grid")) cfg.m_grid = j["m_grid"].get<std::vector<std::size_t>>();
  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (j.contains("instances")) cfg.instances = j["instances"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("grid")) cfg.grid = j["grid"].get<int>();
  if (j.contains("grid_wmin")) cfg.grid_wmin = j["grid_wmin"].get<double>();
  if (j.contains("grid_wmax")) cfg.grid_wmax = j["grid_wmax"].get<double>();
  if (j.contains("support_cap")) cfg.support_cap = j["support_cap"].get<std::size_t>();
  if (j.contains("lp_cap")) cfg.lp_cap = j["lp_cap"].get<std::size_t>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("svg")) cfg.svg = j["svg"].get<bool>();
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  if (!cfg.rho_path.empty()) j["rho"] = cfg.rho_path;
  if (!cfg.xi_path.empty()) j["xi"] = cfg.xi_path;
  if (!cfg.lambda_path.empty()) j["lambda"] = cfg.lambda_path;
  if (!cfg.mu_paths.empty()) j["mu"] = cfg.mu_paths;
  if (!cfg.nu_paths.empty()) j["nu"] = cfg.nu_paths;
  j["p"] = p_to_json(cfg.p);
  j["q"] = p_to_json(cfg.q);
  j["theta_delta"] = cfg.theta_delta;
  j["sigma"] = cfg.sigma;
  j["tau"] = cfg.tau;
  j["family"] = cfg.family;
  j["scales"] = cfg.scales;
  j["epsilons"] = cfg.epsilons;
  j["n_grid"] = cfg.n_grid;
  j["m_grid"] = cfg.m_grid;
  j["trials"] = cfg.trials;
  j["instances"] = cfg.instances;
  j["seed"] = cfg.seed;
  j["grid"] = cfg.grid;
  j["grid_wmin"] = cfg.grid_wmin;
  j["grid_wmax"] = cfg.grid_wmax;
  j["support_cap"] = cfg.support_cap;
  j["lp_cap"] = cfg.lp_cap;
  j["out_dir"] = cfg.out_dir;
  j["svg"] = cfg.svg;
  return j;
}

fs::path resolve_out_dir(RunConfig& cfg) {
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("WPROJ_OUT_DIR");
    cfg.out_dir = env != nullptr && *env != '\0' ? env : "out";
  }
  fs::path dir = fs::path(cfg.out_dir) / cfg.command;
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

MetricSpec spec_for(const RunConfig& cfg, const std::vector<int>& dims) {
  return MetricSpec(cfg.p, dims);
}

// Inputs for the projection-style commands: rho from file or the jittered
// default grid, mu from files or seeded random marginals.
std::pair<ProductMeasure, MarginalVector> load_projection_inputs(const RunConfig& cfg) {
  ProductMeasure rho =
      !cfg.rho_path.empty()
          ? load_product_measure(cfg.rho_path)
          : jittered_grid(MetricSpec(std::isinf(cfg.p) ? 2.0 : cfg.p, {1, 1}), cfg.grid,
                          cfg.grid_wmin, cfg.grid_wmax, mix_seed(cfg.seed, 0xA11CE));
  MarginalVector mu;
  if (!cfg.mu_paths.empty()) {
    for (const std::string& path : cfg.mu_paths) {
      mu.components.push_back(load_measure(path));
    }
  } else {
    InstanceParams params;
    params.block_dims = rho.spec.block_dims;
    mu = random_marginal_vector(params, mix_seed(cfg.seed, 0xB0B));
  }
  if (static_cast<int>(mu.components.size()) != rho.spec.blocks()) {
    throw InputError("mu: expected " + std::to_string(rho.spec.blocks()) +
                     " marginal files, got " + std::to_string(mu.components.size()));
  }
  for (int i = 0; i < rho.spec.blocks(); ++i) {
    if (mu.components[static_cast<std::size_t>(i)].dim() !=
        rho.spec.block_dims[static_cast<std::size_t>(i)]) {
      throw InputError("mu[" + std::to_string(i) + "]: dimension mismatch with rho block");
    }
  }
  return {std::move(rho), std::move(mu)};
}

MarginalVector translate_all(const MarginalVector& mu, double t) {
  MarginalVector out;
  for (const DiscreteMeasure& c : mu.components) {
    Point off(static_cast<std::size_t>(c.dim()), t);
    out.components.push_back(translate(c, off));
  }
  return out;
}

// Moves mass t from the first atom to the last within each component.
MarginalVector mass_swap_all(const MarginalVector& mu, double t) {
  MarginalVector out;
  for (const DiscreteMeasure& c : mu.components) {
    std::vector<double> w = c.weights();
    double moved = std::min(t, w.front() * 0.9);
    w.front() -= moved;
    w.back() += moved;
    out.components.push_back(DiscreteMeasure::from_flat(c.dim(), c.coords(), std::move(w)));
  }
  return out;
}

PerturbationFamily family_of(const RunConfig& cfg, const MarginalVector& mu) {
  if (cfg.family == "translate") {
    return [mu](double t) { return translate_all(mu, t); };
  }
  if (cfg.family == "mass_swap") {
    return [mu](double t) { return mass_swap_all(mu, t); };
  }
  throw InputError("family: expected \"translate\" or \"mass_swap\", got \"" +
                   cfg.family + "\"");
}

int cmd_shadow(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  auto [rho, mu] = load_projection_inputs(cfg);
  MetricSpec spec = spec_for(cfg, rho.spec.block_dims);
  ShadowResult s = compose_shadow(rho, mu, spec, cfg.support_cap);
  save_shadow_result(s, spec, dir);
  write_json(dir / "run_config.json", config_to_json(cfg));
  std::cout << "shadow: value " << format_double(s.value) << ", support "
            << s.shadow.base.size() << " -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_project(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  auto [rho, mu] = load_projection_inputs(cfg);
  MetricSpec spec = spec_for(cfg, rho.spec.block_dims);
  ShadowResult s = compose_shadow(rho, mu, spec, cfg.support_cap);
  ProjectionCertificate cert = project_oracle(rho, mu, spec, cfg.lp_cap);
  save_certificate(cert, spec, dir);
  double agreement = std::abs(s.value - cert.distance);
  json j;
  j["shadow_value"] = s.value;
  j["oracle_distance"] = cert.distance;
  j["agreement"] = agreement;
  j["tolerance"] = 1e-7;
  j["pass"] = agreement <= 1e-7;
  write_json(dir / "agreement.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  std::cout << "project: shadow " << format_double(s.value) << " vs oracle "
            << format_double(cert.distance) << " (|diff| = " << format_double(agreement)
            << ")\n";
  if (agreement > 1e-7) {
    std::cerr << "assertion failed: shadow/oracle disagreement exceeds 1e-7\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_stability(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  CsvWriter csv({"p", "q", "t", "W_q_marginals", "lower", "observed",
                 "rho_xi_term", "ratio"});
  bool violated = false;
  // One row per instance; t carries the instance index for random batches.
  auto add_report = [&](double t, const StabilityReport& rep) {
    double wq = 0.0;
    if (std::isinf(cfg.q)) {
      for (double w : rep.marginal_terms) wq = std::max(wq, w);
    } else {
      for (double w : rep.marginal_terms) wq += std::pow(w, cfg.q);
      wq = std::pow(wq, 1.0 / cfg.q);
    }
    double ratio = rep.rho_xi_term > 1e-12 ? rep.observed / rep.rho_xi_term : 0.0;
    csv.add_row({format_double(cfg.p), format_double(cfg.q), format_double(t),
                 format_double(wq), format_double(rep.lower),
                 format_double(rep.observed), format_double(rep.rho_xi_term),
                 format_double(ratio)});
    if (rep.slack_lower < -1e-9) violated = true;
  };

  if (!cfg.rho_path.empty() && !cfg.xi_path.empty()) {
    ProductMeasure rho = load_product_measure(cfg.rho_path);
    ProductMeasure xi = load_product_measure(cfg.xi_path);
    MarginalVector mu, nu;
    for (const std::string& path : cfg.mu_paths) mu.components.push_back(load_measure(path));
    for (const std::string& path : cfg.nu_paths) nu.components.push_back(load_measure(path));
    if (mu.components.empty()) mu = marginals_of(rho);
    if (nu.components.empty()) nu = marginals_of(xi);
    add_report(0.0, stability_report(rho, xi, mu, nu, cfg.p, cfg.q, cfg.theta_delta,
                                     cfg.support_cap));
  } else {
    InstanceParams params;
    for (int inst = 0; inst < cfg.instances; ++inst) {
      std::uint64_t s = mix_seed(cfg.seed, 0x57AB, inst);
      ProductMeasure rho = random_product_measure(params, cfg.p, mix_seed(s, 0));
      ProductMeasure xi = random_product_measure(params, cfg.p, mix_seed(s, 1));
      MarginalVector mu = random_marginal_vector(params, mix_seed(s, 2));
      MarginalVector nu = random_marginal_vector(params, mix_seed(s, 3));
      add_report(static_cast<double>(inst),
                 stability_report(rho, xi, mu, nu, cfg.p, cfg.q, cfg.theta_delta,
                                  cfg.support_cap));
    }
  }
  csv.write(dir / "stability.csv");
  json j;
  j["theta"] = cfg.p > 1.0 && !std::isinf(cfg.p)
                   ? theta_of(cfg.p, cfg.theta_delta).theta
                   : 0.0;
  j["lower_bound_violated"] = violated;
  write_json(dir / "summary.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  std::cout << "stability: wrote " << (dir / "stability.csv").string() << "\n";
  if (violated) {
    std::cerr << "assertion failed: stability lower bound violated\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_holder(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  auto [rho, mu] = load_projection_inputs(cfg);
  PerturbationFamily family = family_of(cfg, mu);
  HolderFit fit = holder_experiment(rho, mu, family, cfg.p, cfg.q, cfg.scales,
                                    cfg.support_cap);
  MetricSpec pspec(cfg.p, rho.spec.block_dims);
  CsvWriter csv({"p", "q", "t", "W_q_marginals", "lower", "observed",
                 "rho_xi_term", "ratio"});
  for (std::size_t i = 0; i < fit.scales.size(); ++i) {
    double t = fit.scales[i];
    double observed = std::exp(fit.log_y[i]);
    double lower = marginal_vector_distance(mu, family(t), pspec);
    // rho is compared against itself, so the rho-term and its ratio vanish.
    csv.add_row({format_double(cfg.p), format_double(cfg.q), format_double(t),
                 format_double(std::exp(fit.log_x[i])), format_double(lower),
                 format_double(observed), format_double(0.0), format_double(0.0)});
  }
  csv.write(dir / "holder.csv");

  double theta = theta_of(cfg.p > 1.0 && !std::isinf(cfg.p) ? cfg.p : 2.0,
                          cfg.theta_delta)
                     .theta;
  bool pass = fit.fit.slope >= theta - 0.05;
  json j;
  j["slope"] = fit.fit.slope;
  j["intercept"] = fit.fit.intercept;
  j["r2"] = fit.fit.r2;
  j["theta"] = theta;
  j["pass"] = pass;
  write_json(dir / "fit.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  if (cfg.svg) {
    PlotSpec plot;
    plot.title = "shadow distance vs marginal perturbation";
    plot.x_label = "W_q(mu, nu_t)";
    plot.y_label = "W_p(shadow, shadow_t)";
    plot.log_log = true;
    PlotSeries series{"observed", {}, {}};
    for (std::size_t i = 0; i < fit.log_x.size(); ++i) {
      series.xs.push_back(std::exp(fit.log_x[i]));
      series.ys.push_back(std::exp(fit.log_y[i]));
    }
    plot.series.push_back(std::move(series));
    plot.reference_slopes.push_back({theta, "theta(p) envelope"});
    emit_plot(plot, dir / "holder.svg");
  }
  std::cout << "holder: slope " << format_double(fit.fit.slope) << " (r2 "
            << format_double(fit.fit.r2) << ", theta " << format_double(theta) << ")\n";
  if (!pass) {
    std::cerr << "assertion failed: fitted slope below theta(p) - 0.05\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_mapstab(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  DiscreteMeasure lambda = !cfg.lambda_path.empty()
                               ? load_measure(cfg.lambda_path)
                               : grid_measure_1d(0.0, 1.0, std::max(cfg.grid, 2));
  DiscreteMeasure mu =
      !cfg.mu_paths.empty()
          ? load_measure(cfg.mu_paths.front())
          : random_measure(lambda.dim(), 4, 0.0, 1.0, mix_seed(cfg.seed, 0x3A9));
  CsvWriter csv({"t", "lhs_L2", "rhs_W1"});
  std::vector<double> xs, ys;
  for (double t : cfg.scales) {
    Point off(static_cast<std::size_t>(mu.dim()), t);
    MapStabilityPoint pt = map_stability_experiment(lambda, mu, translate(mu, off), cfg.p);
    csv.add_row({format_double(t), format_double(pt.lhs), format_double(pt.rhs_base)});
    if (pt.lhs > 0.0 && pt.rhs_base > 0.0) {
      xs.push_back(std::log(pt.rhs_base));
      ys.push_back(std::log(pt.lhs));
    }
  }
  csv.write(dir / "mapstab.csv");
  if (xs.size() < 3) throw ExperimentError("mapstab: not enough nonzero scales");
  LineFit fit = fit_line(xs, ys);
  bool pass = fit.slope >= 1.0 / 6.0 - 0.05;
  json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r2"] = fit.r2;
  j["theta"] = 1.0 / 6.0;
  j["pass"] = pass;
  write_json(dir / "fit.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  if (cfg.svg) {
    PlotSpec plot;
    plot.title = "transport-map stability";
    plot.x_label = "W_1(mu, nu)";
    plot.y_label = "L2(lambda) map distance";
    plot.log_log = true;
    PlotSeries series{"observed", {}, {}};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      series.xs.push_back(std::exp(xs[i]));
      series.ys.push_back(std::exp(ys[i]));
    }
    plot.series.push_back(std::move(series));
    plot.reference_slopes.push_back({1.0 / 6.0, "slope 1/6"});
    emit_plot(plot, dir / "mapstab.svg");
  }
  std::cout << "mapstab: slope " << format_double(fit.slope) << "\n";
  if (!pass) {
    std::cerr << "assertion failed: map-stability slope below 1/6 - 0.05\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_rates(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  ProductMeasure rho =
      !cfg.rho_path.empty()
          ? load_product_measure(cfg.rho_path)
          : jittered_grid(MetricSpec(std::isinf(cfg.p) ? 2.0 : cfg.p, {1, 1}), cfg.grid,
                          cfg.grid_wmin, cfg.grid_wmax, mix_seed(cfg.seed, 0xA11CE));
  MarginalVector mu;
  if (!cfg.mu_paths.empty()) {
    for (const std::string& path : cfg.mu_paths) mu.components.push_back(load_measure(path));
  } else {
    for (int i = 0; i < rho.spec.blocks(); ++i) {
      ProductMeasure line = jittered_grid(
          MetricSpec(2.0, {rho.spec.block_dims[static_cast<std::size_t>(i)]}), cfg.grid,
          cfg.grid_wmin, cfg.grid_wmax, mix_seed(cfg.seed, 0x30B, i));
      mu.components.push_back(line.base);
    }
  }
  RateConfig rc;
  rc.theta_delta = cfg.theta_delta;
  rc.support_cap = cfg.support_cap;
  RateTable table = sample_complexity_experiment(rho, mu, cfg.n_grid, cfg.m_grid,
                                                 cfg.trials, cfg.seed, cfg.p, rc);
  CsvWriter csv({"n", "m", "trial", "seed", "distance"});
  bool violated = false;
  for (const RateRow& r : table.rows) {
    csv.add_row({CsvWriter::cell(r.n), CsvWriter::cell(r.m), CsvWriter::cell(r.trial),
                 std::to_string(r.seed), format_double(r.distance)});
    if (r.marginal_lower > r.distance + 1e-9) violated = true;
  }
  csv.write(dir / "rates.csv");
  json j;
  j["slope_vs_n"] = table.fit_vs_n.slope;
  j["stderr_vs_n"] = table.fit_vs_n.slope_stderr;
  j["r2_vs_n"] = table.fit_vs_n.r2;
  j["slope_vs_m"] = table.fit_vs_m.slope;
  j["stderr_vs_m"] = table.fit_vs_m.slope_stderr;
  j["r2_vs_m"] = table.fit_vs_m.r2;
  j["ref_slope_n"] = table.ref_slope_n;
  j["ref_slopes_m"] = table.ref_slopes_m;
  j["lower_bound_violated"] = violated;
  write_json(dir / "summary.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  if (cfg.svg) {
    const std::size_t n_max = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
    const std::size_t m_max = *std::max_element(cfg.m_grid.begin(), cfg.m_grid.end());
    PlotSeries vs_m{"mean distance vs m (n max)", {}, {}};
    for (std::size_t m : cfg.m_grid) {
      double sum = 0.0;
      int count = 0;
      for (const RateRow& r : table.rows) {
        if (r.n == n_max && r.m == m) {
          sum += r.distance;
          ++count;
        }
      }
      if (count > 0 && sum > 0.0) {
        vs_m.xs.push_back(static_cast<double>(m));
        vs_m.ys.push_back(sum / count);
      }
    }
    PlotSeries vs_n{"mean distance vs n (m max)", {}, {}};
    for (std::size_t n : cfg.n_grid) {
      double sum = 0.0;
      int count = 0;
      for (const RateRow& r : table.rows) {
        if (r.m == m_max && r.n == n) {
          sum += r.distance;
          ++count;
        }
      }
      if (count > 0 && sum > 0.0) {
        vs_n.xs.push_back(static_cast<double>(n));
        vs_n.ys.push_back(sum / count);
      }
    }
    PlotSpec plot;
    plot.title = "empirical shadow convergence";
    plot.x_label = "sample size";
    plot.y_label = "mean W_p distance";
    plot.log_log = true;
    plot.series.push_back(std::move(vs_m));
    plot.series.push_back(std::move(vs_n));
    if (!table.ref_slopes_m.empty()) {
      plot.reference_slopes.push_back({table.ref_slopes_m.front(), "-theta/s_1"});
    }
    plot.reference_slopes.push_back({table.ref_slope_n, "-1/sum d_i"});
    emit_plot(plot, dir / "rates.svg");
  }
  std::cout << "rates: slope vs m " << format_double(table.fit_vs_m.slope)
            << ", slope vs n " << format_double(table.fit_vs_n.slope) << "\n";
  if (violated) {
    std::cerr << "assertion failed: per-trial marginal lower bound violated\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_dim(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  DiscreteMeasure points;
  MetricSpec norm(std::isinf(cfg.p) ? kInf : cfg.p, {2});
  if (!cfg.rho_path.empty()) {
    ProductMeasure m = load_product_measure(cfg.rho_path);
    points = m.base;
    norm = MetricSpec(cfg.p, {m.base.dim()});
  } else {
    std::vector<double> coords;
    for (int i = 0; i < cfg.grid * 2; ++i) {
      for (int k = 0; k < cfg.grid * 2; ++k) {
        coords.push_back(i / (cfg.grid * 2.0 - 1.0));
        coords.push_back(k / (cfg.grid * 2.0 - 1.0));
      }
    }
    std::size_t count = coords.size() / 2;
    points = DiscreteMeasure::from_flat(
        2, std::move(coords),
        std::vector<double>(count, 1.0 / static_cast<double>(count)));
  }
  CoveringProfile prof = covering_profile(points, cfg.epsilons, cfg.tau, norm);
  CsvWriter csv({"epsilon", "N", "d_eps", "tau"});
  for (const CoveringEstimate& e : prof.estimates) {
    csv.add_row({format_double(e.epsilon), CsvWriter::cell(e.n_balls),
                 format_double(e.d_eps), format_double(e.tau)});
  }
  csv.write(dir / "covering.csv");
  json j;
  j["fitted_dimension"] = prof.dimension_fit.slope;
  j["r2"] = prof.dimension_fit.r2;
  j["tau"] = cfg.tau;
  write_json(dir / "summary.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  if (cfg.svg) {
    PlotSpec plot;
    plot.title = "covering profile";
    plot.x_label = "1/epsilon";
    plot.y_label = "N(epsilon)";
    plot.log_log = true;
    PlotSeries series{"greedy net", {}, {}};
    for (const CoveringEstimate& e : prof.estimates) {
      series.xs.push_back(1.0 / e.epsilon);
      series.ys.push_back(static_cast<double>(e.n_balls));
    }
    plot.series.push_back(std::move(series));
    plot.reference_slopes.push_back(
        {prof.dimension_fit.slope, "fitted dimension"});
    emit_plot(plot, dir / "covering.svg");
  }
  std::cout << "dim: fitted dimension " << format_double(prof.dimension_fit.slope)
            << "\n";
  return kExitOk;
}

int cmd_smooth(RunConfig& cfg) {
  fs::path dir = resolve_out_dir(cfg);
  if (cfg.rho_path.empty()) throw InputError("smooth: --rho measure file required");
  ProductMeasure m = load_product_measure(cfg.rho_path);
  SmoothingSpec stencil = SmoothingSpec::axis_stencil(m.base.dim(), cfg.sigma);
  ProductMeasure blurred = smooth(m, stencil);
  save_measure(blurred, dir / "smoothed.json");
  json j;
  j["sigma"] = cfg.sigma;
  j["offsets"] = stencil.offsets.size();
  j["input_support"] = m.base.size();
  j["output_support"] = blurred.base.size();
  write_json(dir / "summary.json", j);
  write_json(dir / "run_config.json", config_to_json(cfg));
  std::cout << "smooth: " << m.base.size() << " -> " << blurred.base.size()
            << " atoms\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // Config file first (pre-scanned), then flags override its fields.
  try {
    for (int i = 1; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        load_config_file(cfg, argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        load_config_file(cfg, arg.substr(9));
      }
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }

  CLI::App app{"Exact Wasserstein projections of discrete measures"};
  app.require_subcommand(1);

  std::string config_path;
  std::string p_str, q_str;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override)");
    sub->add_option("--rho", cfg.rho_path, "product measure JSON");
    sub->add_option("--xi", cfg.xi_path, "second product measure JSON");
    sub->add_option("--mu", cfg.mu_paths, "per-block marginal measure JSONs");
    sub->add_option("--nu", cfg.nu_paths, "second marginal measure JSONs");
    sub->add_option("--lambda", cfg.lambda_path, "reference measure JSON");
    sub->add_option("--p", p_str, "Wasserstein exponent (number or inf)");
    sub->add_option("--q", q_str, "marginal distance exponent (number or inf)");
    sub->add_option("--seed", cfg.seed, "base seed");
    sub->add_option("--trials", cfg.trials, "trials per grid point");
    sub->add_option("--instances", cfg.instances, "random instances");
    sub->add_option("--sigma", cfg.sigma, "smoothing radius");
    sub->add_option("--tau", cfg.tau, "covering mass drop");
    sub->add_option("--theta-delta", cfg.theta_delta,
                    "interior offset for theta when 1 < p < 2");
    sub->add_option("--family", cfg.family,
                    "perturbation family: translate | mass_swap");
    sub->add_option("--scales", cfg.scales, "perturbation scales");
    sub->add_option("--epsilons", cfg.epsilons, "covering epsilon grid");
    sub->add_option("--n-grid", cfg.n_grid, "rho sample sizes");
    sub->add_option("--m-grid", cfg.m_grid, "marginal sample sizes");
    sub->add_option("--grid", cfg.grid, "built-in grid points per axis");
    sub->add_option("--support-cap", cfg.support_cap, "shadow support cap");
    sub->add_option("--lp-cap", cfg.lp_cap, "oracle LP variable cap");
    sub->add_option("--out-dir", cfg.out_dir, "output directory (or WPROJ_OUT_DIR)");
    sub->add_flag("--svg,!--no-svg", cfg.svg, "emit SVG plots");
  };

  for (const char* name : {"shadow", "project", "stability", "holder", "mapstab",
                           "rates", "dim", "smooth"}) {
    add_common(app.add_subcommand(name));
  }

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    auto parse_exponent = [](const std::string& s, const char* field) {
      if (s == "inf" || s == "Inf" || s == "infinity" || s == "Infinity") return kInf;
      try {
        return std::stod(s);
      } catch (...) {
        throw InputError(std::string(field) + ": expected a number or inf, got " + s);
      }
    };
    if (!p_str.empty()) cfg.p = parse_exponent(p_str, "--p");
    if (!q_str.empty()) cfg.q = parse_exponent(q_str, "--q");
    if (!(cfg.p >= 1.0) && !std::isinf(cfg.p)) {
      throw InputError("--p: must be >= 1 or inf");
    }

    if (cfg.command == "shadow") return cmd_shadow(cfg);
    if (cfg.command == "project") return cmd_project(cfg);
    if (cfg.command == "stability") return cmd_stability(cfg);
    if (cfg.command == "holder") return cmd_holder(cfg);
    if (cfg.command == "mapstab") return cmd_mapstab(cfg);
    if (cfg.command == "rates") return cmd_rates(cfg);
    if (cfg.command == "dim") return cmd_dim(cfg);
    if (cfg.command == "smooth") return cmd_smooth(cfg);
    std::cerr << "unknown subcommand\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SizeError& e) {
    std::cerr << "size error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ExperimentError& e) {
    std::cerr << "experiment error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
