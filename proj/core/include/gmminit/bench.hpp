#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gmminit/em.hpp"
#include "gmminit/init.hpp"
#include "gmminit/model.hpp"

namespace gmminit {

struct RunRecord {
  std::string dataset_id;
  MethodSpec method;
  std::uint64_t init_seed = 0;
  std::uint64_t em_seed = 0;
  double nll_initial = 0.0;
  double nll_final = 0.0;
  std::size_t resamples = 0;
  std::size_t mixes = 0;
  std::size_t keeps = 0;
  double millis = 0.0;
};

struct BenchDataset {
  std::string id;
  DataMatrix data;
};

struct GridConfig {
  std::size_t k = 10;
  std::size_t init_seeds = 30;
  std::size_t em_seeds = 3;
  EmConfig em;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  // Wall-clock capture is off by default so repeat runs produce
  // byte-identical record files.
  bool timing = false;
};

struct FailedCell {
  std::string dataset_id;
  std::string method;
  std::string message;
};

struct GridResult {
  std::vector<RunRecord> records;
  std::vector<FailedCell> failures;
};

// Stream seeds are derived with the splitmix64 fold in rng.hpp:
//   init stream: fold(base, hash(dataset id), hash(method label), tag, i)
//   em stream:   fold(base, hash(dataset id), hash(method label), tag, i, j)
// so every cell is reproducible in isolation and the i-th initialization is
// shared by all of its EM repetitions.
std::uint64_t derive_init_seed(std::uint64_t base, const std::string& dataset_id,
                               const MethodSpec& method, std::size_t init_index);
std::uint64_t derive_em_seed(std::uint64_t base, const std::string& dataset_id,
                             const MethodSpec& method, std::size_t init_index,
                             std::size_t em_index);

GridResult run_grid(const std::vector<BenchDataset>& datasets,
                    const std::vector<MethodSpec>& methods, const GridConfig& cfg);

struct CellSummary {
  std::string dataset_id;
  MethodSpec method;
  std::size_t count = 0;
  double mean_initial = 0.0;
  double var_initial = 0.0;
  double mean_final = 0.0;
  double var_final = 0.0;
  // True when a variance had to fall back to the single-sample convention.
  bool single_sample = false;
};

// Pools all (init seed x EM seed) repetitions of a cell by default;
// best_of_em instead keeps, per initialization, only the EM run with the
// lowest final NLL.
std::vector<CellSummary> summarize(const std::vector<RunRecord>& records,
                                   bool best_of_em = false);

enum class RankCriterion { MeanInitial, MeanFinal, VarInitial, VarFinal };

std::string rank_criterion_name(RankCriterion c);

// Competition ranking: rank(i) = 1 + |{j : v_j < v_i}|, so ties share the
// better rank and the following ranks are skipped.
std::vector<std::size_t> competition_ranks(std::span<const double> values);

struct RankTable {
  RankCriterion criterion = RankCriterion::MeanFinal;
  std::vector<std::string> methods;
  // counts[m][r] = number of datasets where method m achieved rank r+1.
  std::vector<std::vector<std::size_t>> counts;
  std::size_t dataset_count = 0;
};

RankTable rank_methods(const std::vector<CellSummary>& summaries, RankCriterion criterion);

enum class ReportFormat { Csv, StructuredText };

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);

void write_rank_table_csv(const std::filesystem::path& path, const RankTable& table);
std::string rank_table_text(const RankTable& table);

// Writes records.csv plus the rank tables, either one CSV per table or a
// single report.txt with all tables rendered.
void export_report(const std::filesystem::path& dir,
                   const std::vector<RunRecord>& records,
                   const std::vector<RankTable>& tables, ReportFormat format);

}  // namespace gmminit
