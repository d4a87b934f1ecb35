#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "gmminit/bench.hpp"
#include "gmminit/datagen.hpp"
#include "gmminit/em.hpp"
#include "gmminit/init.hpp"
#include "gmminit/io.hpp"
#include "gmminit/model.hpp"
#include "gmminit/rng.hpp"

namespace gmminit::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

Eccentricity parse_eccentricity(const std::string& text) {
  if (text == "range") return Eccentricity::range();
  char* end = nullptr;
  const double e = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw std::invalid_argument("eccentricity must be a number or 'range': " + text);
  return Eccentricity::fixed(e);
}

SizeMode parse_sizes(const std::string& text) {
  if (text == "constant") return SizeMode::Constant;
  if (text == "different") return SizeMode::Different;
  throw std::invalid_argument("sizes must be 'constant' or 'different': " + text);
}

ReportFormat parse_format(const std::string& text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "text") return ReportFormat::StructuredText;
  throw std::invalid_argument("format must be 'csv' or 'text': " + text);
}

MethodSpec build_method(const std::string& name, std::optional<double> alpha,
                        std::optional<double> sample_fraction) {
  MethodSpec spec;
  spec.kind = MethodSpec::parse_kind(name);
  spec.alpha = alpha;
  spec.sample_fraction = sample_fraction;
  // Standard hyperparameters when the flag is omitted.
  if (spec.kind == MethodKind::Adaptive && !spec.alpha) spec.alpha = 0.5;
  const bool sampled = spec.kind == MethodKind::GonzalezForGmm ||
                       spec.kind == MethodKind::KwedlosGonzalez ||
                       spec.kind == MethodKind::Agglomerative;
  if (sampled && !spec.sample_fraction) spec.sample_fraction = 0.1;
  spec.validate();
  return spec;
}

void quote_csv(std::ostream& out, const std::string& s) {
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

int run_generate(const GenerateOptions& opts) {
  GeneratorSpec spec;
  spec.k = opts.k;
  spec.d = opts.d;
  spec.n_points = opts.n;
  spec.separation = opts.sep;
  spec.weight_exponent = opts.weight_exponent;
  spec.eccentricity = parse_eccentricity(opts.eccentricity);
  spec.size_mode = parse_sizes(opts.sizes);
  spec.cube_side = opts.side;
  spec.noise_fraction = opts.noise;
  spec.seed = opts.seed;
  spec.validate();

  std::cout << "seed: " << spec.seed << '\n'
            << "config: generate k=" << spec.k << " d=" << spec.d
            << " n=" << spec.n_points << " sep=" << fmt(spec.separation)
            << " cw=" << fmt(spec.weight_exponent) << " ecc=" << opts.eccentricity
            << " sizes=" << opts.sizes
            << " side=" << (spec.cube_side > 0 ? fmt(spec.cube_side) : "auto")
            << " noise=" << fmt(spec.noise_fraction) << " labels="
            << (opts.labels ? "yes" : "no") << " data=" << opts.out_data
            << " model=" << opts.out_model << '\n';

  Rng rng(spec.seed);
  const GmmParams theta = generate_gmm(spec, rng);
  const LabeledDataset ds = sample_dataset(theta, spec, rng);

  write_points_csv(opts.out_data, ds.data, opts.labels ? &ds.labels : nullptr);
  write_model_json(opts.out_model, theta);

  std::size_t noise_rows = 0;
  for (int label : ds.labels)
    if (label == kNoiseLabel) ++noise_rows;
  std::cout << "rows: " << ds.data.size() << " (signal "
            << ds.data.size() - noise_rows << ", noise " << noise_rows << ")\n";
  if (theta.size() >= 2)
    std::cout << "separation: " << fmt(separation(theta)) << '\n';
  std::cout << "eccentricities:";
  for (const auto& c : theta.components())
    std::cout << ' ' << fmt(eccentricity(c.covariance()));
  std::cout << '\n';
  return 0;
}

int run_fit(const FitOptions& opts) {
  const MethodSpec method = build_method(opts.method, opts.alpha, opts.sample_fraction);
  if (opts.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (opts.k < 1) throw std::invalid_argument("k must be >= 1");

  std::cout << "seed: " << opts.seed << '\n'
            << "config: fit data=" << opts.data_path << " method=" << method.label()
            << " k=" << opts.k << " rounds=" << opts.rounds << " label_col="
            << (opts.label_column ? std::to_string(*opts.label_column) : "none")
            << " model=" << opts.out_model << " trace=" << opts.out_trace << '\n';

  const CsvDataset csv = read_points_csv(opts.data_path, opts.label_column);
  const DataMatrix& X = csv.data;
  if (opts.k > X.size())
    throw std::invalid_argument("k=" + std::to_string(opts.k) + " exceeds the " +
                                std::to_string(X.size()) + " data rows");

  // One user-facing seed, two independent streams.
  Rng init_rng(seed_combine(opts.seed, hash_string("init-stream")));
  Rng em_rng(seed_combine(opts.seed, hash_string("em-stream")));

  const GmmParams theta0 = run_method(X, opts.k, method, init_rng);
  const double nll_initial = -log_likelihood(X, theta0);

  EmConfig cfg;
  cfg.rounds = opts.rounds;
  const auto [theta, trace] = em_run(X, theta0, cfg, em_rng);

  write_model_json(opts.out_model, theta);
  write_trace_csv(opts.out_trace, trace);

  std::cout << "nll_initial: " << fmt(nll_initial) << '\n'
            << "nll_final: " << fmt(-trace.log_likelihood.back()) << '\n'
            << "degeneracies: resamples=" << trace.resample_events
            << " mixes=" << trace.covariance_mix_events
            << " keeps=" << trace.covariance_keep_events << '\n';
  return 0;
}

int run_bench(const BenchOptions& opts) {
  const Manifest manifest = read_manifest(opts.manifest_path);
  const ReportFormat format = parse_format(opts.format);
  if (opts.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  std::cout << "seed: " << manifest.seed << '\n'
            << "config: bench manifest=" << opts.manifest_path
            << " k=" << manifest.k << " rounds=" << manifest.rounds
            << " init_seeds=" << manifest.init_seeds
            << " em_seeds=" << manifest.em_seeds << " jobs=" << opts.jobs
            << " best_of_em=" << (opts.best_of_em ? "yes" : "no")
            << " timing=" << (opts.timing ? "yes" : "no")
            << " format=" << opts.format << " out=" << opts.out_dir << '\n';
  std::cout << "methods:";
  for (const auto& m : manifest.methods) std::cout << ' ' << m.label();
  std::cout << '\n';

  const auto base = std::filesystem::path(opts.manifest_path).parent_path();
  std::vector<BenchDataset> datasets;
  datasets.reserve(manifest.datasets.size());
  for (const auto& entry : manifest.datasets) {
    std::filesystem::path p = entry.path;
    if (p.is_relative()) p = base / p;
    try {
      datasets.push_back(BenchDataset{entry.id, read_points_csv(p, entry.label_column).data});
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset '" + entry.id + "': " + e.what());
    }
    std::cout << "dataset " << entry.id << ": " << datasets.back().data.size()
              << " x " << datasets.back().data.dim() << '\n';
  }

  GridConfig cfg;
  cfg.k = manifest.k;
  cfg.init_seeds = manifest.init_seeds;
  cfg.em_seeds = manifest.em_seeds;
  cfg.em.rounds = manifest.rounds;
  cfg.base_seed = manifest.seed;
  cfg.jobs = opts.jobs;
  cfg.timing = opts.timing;

  const GridResult result = run_grid(datasets, manifest.methods, cfg);
  const auto summaries = summarize(result.records, opts.best_of_em);
  std::vector<RankTable> tables;
  for (RankCriterion c : {RankCriterion::MeanInitial, RankCriterion::MeanFinal,
                          RankCriterion::VarInitial, RankCriterion::VarFinal})
    tables.push_back(rank_methods(summaries, c));

  export_report(opts.out_dir, result.records, tables, format);
  std::cout << "records: " << result.records.size() << '\n';

  if (!result.failures.empty()) {
    const auto fail_path = std::filesystem::path(opts.out_dir) / "failures.csv";
    std::ofstream file(fail_path);
    if (!file)
      throw std::runtime_error("cannot open for writing: " + fail_path.string());
    file << "dataset_id,method,message\n";
    for (const auto& f : result.failures) {
      file << f.dataset_id << ',' << f.method << ',';
      quote_csv(file, f.message);
      file << '\n';
    }
    std::cout << "PARTIAL: " << result.failures.size()
              << " failed cells, see " << fail_path.string() << '\n';
    return 1;
  }
  return 0;
}

int run_rank(const RankOptions& opts) {
  const ReportFormat format = parse_format(opts.format);
  std::cout << "config: rank records=" << opts.records_path
            << " best_of_em=" << (opts.best_of_em ? "yes" : "no")
            << " format=" << opts.format << " out=" << opts.out_dir << '\n';

  const auto records = read_records_csv(opts.records_path);
  const auto summaries = summarize(records, opts.best_of_em);
  std::vector<RankTable> tables;
  for (RankCriterion c : {RankCriterion::MeanInitial, RankCriterion::MeanFinal,
                          RankCriterion::VarInitial, RankCriterion::VarFinal})
    tables.push_back(rank_methods(summaries, c));
  export_report(opts.out_dir, records, tables, format);
  std::cout << "records: " << records.size() << '\n';
  return 0;
}

}  // namespace gmminit::cli
