#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian mixture fitting: initialization strategies, EM, benchmarks"};
  app.require_subcommand(1);

  gmminit::cli::GenerateOptions gen;
  auto* cmd_gen = app.add_subcommand("generate", "Generate a synthetic mixture dataset");
  cmd_gen->add_option("--k", gen.k, "Number of components");
  cmd_gen->add_option("--d", gen.d, "Dimension");
  cmd_gen->add_option("--n", gen.n, "Number of points");
  cmd_gen->add_option("--sep", gen.sep, "Separation target (> 0)");
  cmd_gen->add_option("--cw", gen.weight_exponent, "Weight exponent (0 = uniform)");
  cmd_gen->add_option("--ecc", gen.eccentricity, "Eccentricity: a number or 'range'");
  cmd_gen->add_option("--sizes", gen.sizes, "Size mode: constant or different");
  cmd_gen->add_option("--side", gen.side, "Mean cube side (0 = auto)");
  cmd_gen->add_option("--noise", gen.noise, "Uniform noise fraction in [0, 1)");
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--out", gen.out_data, "Dataset CSV path");
  cmd_gen->add_option("--truth", gen.out_model, "Generating mixture JSON path");
  cmd_gen->add_flag("--labels", gen.labels, "Append origin labels as a last column");

  gmminit::cli::FitOptions fit;
  auto* cmd_fit = app.add_subcommand("fit", "Initialize and run EM on a CSV dataset");
  cmd_fit->add_option("data", fit.data_path, "Dataset CSV path")->required();
  cmd_fit->add_option("--method", fit.method,
                      "uniform|kmeanspp|gonzalez|adaptive|gonzalez_gmm|"
                      "kwedlo_gonzalez|agglomerative");
  double fit_alpha = 0.0, fit_s = 0.0;
  auto* alpha_opt = cmd_fit->add_option("--alpha", fit_alpha, "Adaptive mixing weight");
  auto* s_opt = cmd_fit->add_option("--s", fit_s, "Subsample fraction");
  cmd_fit->add_option("--k", fit.k, "Number of components");
  cmd_fit->add_option("--rounds", fit.rounds, "EM rounds");
  std::size_t fit_label_col = 0;
  auto* label_opt =
      cmd_fit->add_option("--label-col", fit_label_col, "Label column to exclude");
  cmd_fit->add_option("--seed", fit.seed, "RNG seed");
  cmd_fit->add_option("--out", fit.out_model, "Fitted model JSON path");
  cmd_fit->add_option("--trace", fit.out_trace, "Per-round NLL CSV path");

  gmminit::cli::BenchOptions bench;
  auto* cmd_bench = app.add_subcommand("bench", "Run a benchmark grid from a manifest");
  cmd_bench->add_option("manifest", bench.manifest_path, "Manifest JSON path")->required();
  cmd_bench->add_option("--out", bench.out_dir, "Report directory");
  cmd_bench->add_option("--jobs", bench.jobs, "Parallel grid cells");
  cmd_bench->add_flag("--best-of-em", bench.best_of_em,
                      "Keep only the best EM repetition per initialization");
  cmd_bench->add_flag("--timing", bench.timing,
                      "Record wall time (off keeps reruns byte-identical)");
  cmd_bench->add_option("--format", bench.format, "Rank table format: csv or text");

  gmminit::cli::RankOptions rank;
  auto* cmd_rank = app.add_subcommand("rank", "Re-aggregate an existing records CSV");
  cmd_rank->add_option("records", rank.records_path, "Records CSV path")->required();
  cmd_rank->add_option("--out", rank.out_dir, "Report directory");
  cmd_rank->add_flag("--best-of-em", rank.best_of_em,
                     "Keep only the best EM repetition per initialization");
  cmd_rank->add_option("--format", rank.format, "Rank table format: csv or text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return gmminit::cli::run_generate(gen);
    if (cmd_fit->parsed()) {
      if (alpha_opt->count() > 0) fit.alpha = fit_alpha;
      if (s_opt->count() > 0) fit.sample_fraction = fit_s;
      if (label_opt->count() > 0) fit.label_column = fit_label_col;
      return gmminit::cli::run_fit(fit);
    }
    if (cmd_bench->parsed()) return gmminit::cli::run_bench(bench);
    if (cmd_rank->parsed()) return gmminit::cli::run_rank(rank);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
