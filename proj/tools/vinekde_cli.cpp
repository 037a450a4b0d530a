#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vinekde/bench.hpp"
#include "vinekde/classify.hpp"
#include "vinekde/csv.hpp"
#include "vinekde/targets.hpp"
#include "vinekde/vinefit.hpp"

namespace {

using vinekde::Matrix;

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("VINEKDE_THREADS")) {
      threads = std::atoi(env);
    }
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Nonparametric vine-copula density estimation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap OpenMP worker threads");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw samples from a benchmark target");
  std::string sim_scenario = "gauss", sim_out;
  int sim_d = 3;
  std::uint64_t sim_n = 100, sim_seed = 0;
  double sim_tau = 0.4;
  sim->add_option("--scenario", sim_scenario, "gauss|gumbel|nonsimplified");
  sim->add_option("--d", sim_d, "dimension")->check(CLI::Range(2, 1000));
  sim->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "rng seed")->required();
  sim->add_option("--tau", sim_tau, "pairwise Kendall's tau target");
  sim->add_option("--out", sim_out, "output csv")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit a vine density model to a csv");
  std::string fit_input, fit_output;
  bool fit_indep = false;
  double fit_level = 0.05, fit_margin_mult = 1.0;
  fit->add_option("--input", fit_input, "input csv")->required();
  fit->add_option("--output", fit_output, "output model json")->required();
  fit->add_flag("--independence-test", fit_indep, "prune edges by independence test");
  fit->add_option("--level", fit_level, "independence test level")
      ->check(CLI::Range(1e-6, 0.5));
  fit->add_option("--margin-mult", fit_margin_mult, "marginal bandwidth multiplier")
      ->check(CLI::PositiveNumber);

  // density
  auto* dens = app.add_subcommand("density", "evaluate a fitted model on points");
  std::string dens_model, dens_input, dens_out;
  dens->add_option("--model", dens_model, "model json")->required();
  dens->add_option("--input", dens_input, "points csv")->required();
  dens->add_option("--out", dens_out, "output csv")->required();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "IAE comparison against the classical estimator");
  std::string bench_scenario = "gauss", bench_out;
  int bench_d = 3;
  std::uint64_t bench_n = 500, bench_reps = 20, bench_mc = 1000, bench_seed = 0;
  double bench_tau = 0.4;
  bench->add_option("--scenario", bench_scenario, "gauss|gumbel|nonsimplified");
  bench->add_option("--d", bench_d, "dimension")->check(CLI::Range(2, 1000));
  bench->add_option("--n", bench_n, "sample size per replicate")->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_reps, "replicates")->check(CLI::PositiveNumber);
  bench->add_option("--mc", bench_mc, "Monte Carlo evaluation points")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "rng seed")->required();
  bench->add_option("--tau", bench_tau, "pairwise Kendall's tau target");
  bench->add_option("--out", bench_out, "output report json")->required();

  // classify
  auto* cls = app.add_subcommand("classify", "two-class Bayes classification");
  std::string cls_data, cls_label = "class", cls_out, cls_scores;
  double cls_split = 0.6667, cls_level = 0.05, cls_margin_mult = 2.0, cls_prior_g = 0.5;
  std::uint64_t cls_subsample = 0;
  bool cls_no_indep = false;
  cls->add_option("--data", cls_data, "labeled csv")->required();
  cls->add_option("--label-col", cls_label, "label column name");
  cls->add_option("--split", cls_split, "training fraction (positional split)")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  cls->add_option("--out", cls_out, "summary json")->required();
  cls->add_option("--scores", cls_scores, "per-row posterior csv");
  cls->add_option("--subsample", cls_subsample, "max training rows per class (0 = all)");
  cls->add_option("--level", cls_level, "independence test level")
      ->check(CLI::Range(1e-6, 0.5));
  cls->add_option("--margin-mult", cls_margin_mult, "marginal bandwidth multiplier")
      ->check(CLI::PositiveNumber);
  cls->add_option("--prior-g", cls_prior_g, "prior probability of class G")
      ->check(CLI::Range(0.0, 1.0));
  cls->add_flag("--no-independence-test", cls_no_indep, "disable edge pruning");

  CLI11_PARSE(app, argc, argv);
  apply_threads(threads);

  if (sim->parsed()) {
    vinekde::ScenarioSpec spec{vinekde::scenario_from_string(sim_scenario), sim_d, sim_tau};
    const Matrix data = vinekde::sample_scenario(spec, sim_n, sim_seed);
    std::vector<std::string> header(sim_d);
    for (int i = 0; i < sim_d; ++i) header[i] = "x" + std::to_string(i + 1);
    vinekde::write_numeric_csv(sim_out, header, data);
    std::cerr << "simulate: wrote " << data.rows << " rows to " << sim_out << "\n";
  } else if (fit->parsed()) {
    const auto csv = vinekde::read_numeric_csv(fit_input);
    vinekde::VineFitOptions opts;
    opts.independence_test = fit_indep;
    opts.independence_level = fit_level;
    opts.margin_bandwidth_multiplier = fit_margin_mult;
    const auto model = vinekde::fit_vine(csv.values, opts);
    write_text_file(fit_output, model.serialize() + "\n");
    std::cerr << "fit: d=" << model.dimension() << " n=" << model.meta.n
              << " hfunc_fallbacks=" << model.hfunc_fallbacks() << "\n";
  } else if (dens->parsed()) {
    const auto model = vinekde::VineDensityModel::deserialize(read_text_file(dens_model));
    const auto pts = vinekde::read_numeric_csv(dens_input);
    if (static_cast<int>(pts.values.cols) != model.dimension())
      throw std::invalid_argument("points csv has " + std::to_string(pts.values.cols) +
                                  " columns, model expects " +
                                  std::to_string(model.dimension()));
    const auto values = model.density_batch(pts.values);
    Matrix out(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) out.at(i, 0) = values[i];
    vinekde::write_numeric_csv(dens_out, {"density"}, out);
    std::cerr << "density: evaluated " << values.size() << " points\n";
  } else if (bench->parsed()) {
    vinekde::ScenarioSpec spec{vinekde::scenario_from_string(bench_scenario), bench_d,
                               bench_tau};
    const auto report =
        vinekde::run_scenario(spec, bench_n, bench_reps, bench_mc, bench_seed);
    write_text_file(bench_out, report.to_json());
    std::cerr << "benchmark: median IAE vine=" << report.median_iae_vine
              << " mvkde=" << report.median_iae_mvkde
              << " moods_p=" << report.moods.p_value
              << " wall=" << report.wall_clock_seconds << "s\n";
  } else if (cls->parsed()) {
    const auto all = vinekde::load_labeled_csv(cls_data, cls_label);
    const auto [train, test] = all.split(cls_split);
    vinekde::ClassifyOptions opts;
    opts.prior_g = cls_prior_g;
    opts.margin_bandwidth_multiplier = cls_margin_mult;
    opts.independence_test = !cls_no_indep;
    opts.independence_level = cls_level;
    opts.subsample_per_class = cls_subsample;
    const auto res = vinekde::run_classification(train, test, opts);

    nlohmann::ordered_json j;
    j["n_total"] = all.features.rows;
    j["n_train"] = train.features.rows;
    j["n_test"] = test.features.rows;
    j["n_train_g"] = res.n_train_g;
    j["n_train_h"] = res.n_train_h;
    j["n_test_g"] = test.count('G');
    j["n_test_h"] = test.count('H');
    nlohmann::ordered_json tprs;
    for (const auto& [fpr, tpr] : res.summary.tpr_at_fpr) {
      char key[16];
      std::snprintf(key, sizeof(key), "%.2f", fpr);
      tprs[key] = tpr;
    }
    j["tpr_at_fpr"] = std::move(tprs);
    j["loacc"] = res.summary.loacc;
    j["highacc"] = res.summary.highacc;
    j["accuracy_at_half"] = res.accuracy_at_half;
    j["prior_fallbacks"] = res.prior_fallbacks;
    write_text_file(cls_out, j.dump(2) + "\n");

    if (!cls_scores.empty()) {
      std::ostringstream ss;
      ss << "posterior,label\n";
      for (std::size_t i = 0; i < res.posteriors.size(); ++i)
        ss << vinekde::format_full_precision(res.posteriors[i]) << ","
           << test.labels[i] << "\n";
      write_text_file(cls_scores, ss.str());
    }
    std::cerr << "classify: loacc=" << res.summary.loacc
              << " highacc=" << res.summary.highacc << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::domain_error& e) {
    std::cerr << "error: domain: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("cannot open file", 0) == 0)
      std::cerr << "error: io: " << msg << "\n";
    else if (msg.rfind("model file", 0) == 0)
      std::cerr << "error: schema: " << msg << "\n";
    else
      std::cerr << "error: invalid: " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 2;
  }
}
