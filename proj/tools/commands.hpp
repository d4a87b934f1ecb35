#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace gmminit::cli {

struct GenerateOptions {
  std::size_t k = 10;
  std::size_t d = 2;
  std::size_t n = 10000;
  double sep = 2.0;
  double weight_exponent = 0.0;
  std::string eccentricity = "1";  // a number, or "range" for U[1,10]
  std::string sizes = "constant";  // or "different"
  double side = 0.0;               // 0 selects the default cube side
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_data = "dataset.csv";
  std::string out_model = "truth.json";
  bool labels = false;
};

struct FitOptions {
  std::string data_path;
  std::string method = "kmeanspp";
  std::optional<double> alpha;
  std::optional<double> sample_fraction;
  std::size_t k = 10;
  std::size_t rounds = 50;
  std::optional<std::size_t> label_column;
  std::uint64_t seed = 0;
  std::string out_model = "model.json";
  std::string out_trace = "trace.csv";
};

struct BenchOptions {
  std::string manifest_path;
  std::string out_dir = "report";
  std::size_t jobs = 1;
  bool best_of_em = false;
  bool timing = false;
  std::string format = "csv";  // or "text"
};

struct RankOptions {
  std::string records_path;
  std::string out_dir = "ranked";
  bool best_of_em = false;
  std::string format = "csv";
};

int run_generate(const GenerateOptions& opts);
int run_fit(const FitOptions& opts);
int run_bench(const BenchOptions& opts);
int run_rank(const RankOptions& opts);

}  // namespace gmminit::cli
