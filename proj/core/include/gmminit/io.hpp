#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmminit/em.hpp"
#include "gmminit/init.hpp"
#include "gmminit/model.hpp"

namespace gmminit {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& path, std::size_t line,
             const std::string& message)
      : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvDataset {
  DataMatrix data;
  // Values of the excluded label column, row-aligned; empty when no label
  // column was requested.
  std::vector<int> labels;
  bool had_header = false;
};

// Comma-separated numeric rows; a non-numeric first row is treated as a
// header and skipped. label_column (0-based) excludes that column from the
// features and parses it as an integer label.
CsvDataset read_points_csv(const std::filesystem::path& path,
                           std::optional<std::size_t> label_column = {});

// Labels, when given, are appended as a final integer column.
void write_points_csv(const std::filesystem::path& path, const DataMatrix& data,
                      const std::vector<int>* labels = nullptr);

// Mixture parameters as JSON: weights, means, covariances (row-major).
void write_model_json(const std::filesystem::path& path, const GmmParams& theta);
GmmParams read_model_json(const std::filesystem::path& path);

// Per-round negative log-likelihood, one row per executed round.
void write_trace_csv(const std::filesystem::path& path, const EmTrace& trace);

struct ManifestEntry {
  std::string path;
  std::string id;
  std::optional<std::size_t> label_column;
};

struct Manifest {
  std::size_t k = 10;
  std::size_t rounds = 50;
  std::size_t init_seeds = 30;
  std::size_t em_seeds = 3;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> datasets;
  std::vector<MethodSpec> methods;
};

// JSON manifest for benchmark runs. "datasets" entries are either path
// strings or {path, id, label_column} objects; "methods" entries are kind
// names or {kind, alpha, s} objects and default to the full eight-method
// roster with the standard hyperparameters.
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace gmminit
