#include "gmminit/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gmminit {

namespace {

constexpr std::uint64_t kInitStreamTag = hash_string("init-stream");
constexpr std::uint64_t kEmStreamTag = hash_string("em-stream");

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Sorting before accumulating makes the statistics independent of record
// collection order, bit for bit.
std::pair<double, double> sorted_mean_var(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(values.size() - 1)};
}

double criterion_value(const CellSummary& s, RankCriterion c) {
  switch (c) {
    case RankCriterion::MeanInitial: return s.mean_initial;
    case RankCriterion::MeanFinal: return s.mean_final;
    case RankCriterion::VarInitial: return s.var_initial;
    case RankCriterion::VarFinal: return s.var_final;
  }
  throw std::logic_error("unknown rank criterion");
}

constexpr const char* kRecordsHeader =
    "dataset_id,method,alpha,s,init_seed,em_seed,nll_initial,nll_final,"
    "resamples,mixes,keeps,millis";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::uint64_t derive_init_seed(std::uint64_t base, const std::string& dataset_id,
                               const MethodSpec& method, std::size_t init_index) {
  return derive_seed({base, hash_string(dataset_id), hash_string(method.label()),
                      kInitStreamTag, static_cast<std::uint64_t>(init_index)});
}

std::uint64_t derive_em_seed(std::uint64_t base, const std::string& dataset_id,
                             const MethodSpec& method, std::size_t init_index,
                             std::size_t em_index) {
  return derive_seed({base, hash_string(dataset_id), hash_string(method.label()),
                      kEmStreamTag, static_cast<std::uint64_t>(init_index),
                      static_cast<std::uint64_t>(em_index)});
}

GridResult run_grid(const std::vector<BenchDataset>& datasets,
                    const std::vector<MethodSpec>& methods, const GridConfig& cfg) {
  require(!datasets.empty(), "run_grid: dataset list is empty");
  require(!methods.empty(), "run_grid: method list is empty");
  require(cfg.k >= 1, "run_grid: k must be >= 1");
  require(cfg.init_seeds >= 1 && cfg.em_seeds >= 1,
          "run_grid: seed counts must be >= 1");

  const std::size_t n_items = datasets.size() * methods.size() * cfg.init_seeds;
  std::vector<std::optional<RunRecord>> slots(n_items * cfg.em_seeds);
  std::vector<std::optional<FailedCell>> fails(n_items);

  using clock = std::chrono::steady_clock;
  auto worker_body = [&](std::size_t item) {
    const std::size_t per_dataset = methods.size() * cfg.init_seeds;
    const std::size_t d = item / per_dataset;
    const std::size_t m = (item % per_dataset) / cfg.init_seeds;
    const std::size_t i = item % cfg.init_seeds;
    const BenchDataset& ds = datasets[d];
    const MethodSpec& spec = methods[m];

    const std::uint64_t init_seed = derive_init_seed(cfg.base_seed, ds.id, spec, i);
    try {
      const auto t0 = clock::now();
      Rng init_rng(init_seed);
      const GmmParams theta0 = run_method(ds.data, cfg.k, spec, init_rng);
      const double init_ms =
          std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      const double nll_initial = -log_likelihood(ds.data, theta0);

      for (std::size_t j = 0; j < cfg.em_seeds; ++j) {
        const std::uint64_t em_seed = derive_em_seed(cfg.base_seed, ds.id, spec, i, j);
        Rng em_rng(em_seed);
        const auto t1 = clock::now();
        auto [theta, trace] = em_run(ds.data, theta0, cfg.em, em_rng);
        const double em_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t1).count();
        RunRecord rec;
        rec.dataset_id = ds.id;
        rec.method = spec;
        rec.init_seed = init_seed;
        rec.em_seed = em_seed;
        rec.nll_initial = nll_initial;
        rec.nll_final = -log_likelihood(ds.data, theta);
        rec.resamples = trace.resample_events;
        rec.mixes = trace.covariance_mix_events;
        rec.keeps = trace.covariance_keep_events;
        rec.millis = cfg.timing ? init_ms + em_ms : 0.0;
        slots[item * cfg.em_seeds + j] = std::move(rec);
      }
    } catch (const std::exception& e) {
      fails[item] = FailedCell{ds.id, spec.label(), e.what()};
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  if (jobs == 1 || n_items == 1) {
    for (std::size_t item = 0; item < n_items; ++item) worker_body(item);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(jobs, n_items);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t item = next.fetch_add(1); item < n_items;
             item = next.fetch_add(1))
          worker_body(item);
      });
    }
    for (auto& t : pool) t.join();
  }

  GridResult result;
  result.records.reserve(slots.size());
  for (auto& slot : slots)
    if (slot) result.records.push_back(std::move(*slot));
  for (auto& f : fails)
    if (f) result.failures.push_back(std::move(*f));
  return result;
}

std::vector<CellSummary> summarize(const std::vector<RunRecord>& records,
                                   bool best_of_em) {
  require(!records.empty(), "summarize: no records");

  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> cells;
  for (const auto& r : records)
    cells[{r.dataset_id, r.method.label()}].push_back(&r);

  std::vector<CellSummary> out;
  out.reserve(cells.size());
  for (auto& [key, recs] : cells) {
    std::vector<const RunRecord*> used;
    if (best_of_em) {
      // Per initialization keep the EM repetition with the lowest final
      // NLL; break ties on the EM seed so permuted inputs agree.
      std::map<std::uint64_t, const RunRecord*> best;
      for (const auto* r : recs) {
        auto [it, inserted] = best.try_emplace(r->init_seed, r);
        if (!inserted) {
          const RunRecord* cur = it->second;
          if (r->nll_final < cur->nll_final ||
              (r->nll_final == cur->nll_final && r->em_seed < cur->em_seed))
            it->second = r;
        }
      }
      for (const auto& [seed, r] : best) used.push_back(r);
    } else {
      used = recs;
    }

    std::vector<double> initial, final_;
    initial.reserve(used.size());
    final_.reserve(used.size());
    for (const auto* r : used) {
      initial.push_back(r->nll_initial);
      final_.push_back(r->nll_final);
    }

    CellSummary s;
    s.dataset_id = key.first;
    s.method = used.front()->method;
    s.count = used.size();
    std::tie(s.mean_initial, s.var_initial) = sorted_mean_var(std::move(initial));
    std::tie(s.mean_final, s.var_final) = sorted_mean_var(std::move(final_));
    s.single_sample = used.size() < 2;
    out.push_back(std::move(s));
  }
  return out;
}

std::string rank_criterion_name(RankCriterion c) {
  switch (c) {
    case RankCriterion::MeanInitial: return "mean_initial";
    case RankCriterion::MeanFinal: return "mean_final";
    case RankCriterion::VarInitial: return "var_initial";
    case RankCriterion::VarFinal: return "var_final";
  }
  throw std::logic_error("unknown rank criterion");
}

std::vector<std::size_t> competition_ranks(std::span<const double> values) {
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t better = 0;
    for (std::size_t j = 0; j < values.size(); ++j)
      if (values[j] < values[i]) ++better;
    ranks[i] = 1 + better;
  }
  return ranks;
}

RankTable rank_methods(const std::vector<CellSummary>& summaries,
                       RankCriterion criterion) {
  require(!summaries.empty(), "rank_methods: no summaries");

  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, const CellSummary*> by_key;
  for (const auto& s : summaries) {
    const auto key = std::make_pair(s.dataset_id, s.method.label());
    require(by_key.emplace(key, &s).second,
            "rank_methods: duplicate summary for " + s.dataset_id + "/" +
                s.method.label());
    if (std::find(datasets.begin(), datasets.end(), s.dataset_id) == datasets.end())
      datasets.push_back(s.dataset_id);
    if (std::find(methods.begin(), methods.end(), s.method.label()) == methods.end())
      methods.push_back(s.method.label());
  }
  std::sort(datasets.begin(), datasets.end());
  std::sort(methods.begin(), methods.end());

  RankTable table;
  table.criterion = criterion;
  table.methods = methods;
  table.dataset_count = datasets.size();
  table.counts.assign(methods.size(), std::vector<std::size_t>(methods.size(), 0));

  std::vector<double> values(methods.size());
  for (const auto& ds : datasets) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto it = by_key.find({ds, methods[m]});
      require(it != by_key.end(),
              "rank_methods: missing summary for " + ds + "/" + methods[m]);
      values[m] = criterion_value(*it->second, criterion);
    }
    const auto ranks = competition_ranks(values);
    for (std::size_t m = 0; m < methods.size(); ++m)
      ++table.counts[m][ranks[m] - 1];
  }
  return table;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << kRecordsHeader << '\n';
  for (const auto& r : records) {
    require(r.dataset_id.find_first_of(",\"\n") == std::string::npos,
            "write_records_csv: dataset id contains a CSV delimiter: " + r.dataset_id);
    file << r.dataset_id << ',' << r.method.kind_name() << ',';
    if (r.method.alpha) file << format_double(*r.method.alpha);
    file << ',';
    if (r.method.sample_fraction) file << format_double(*r.method.sample_fraction);
    file << ',' << r.init_seed << ',' << r.em_seed << ','
         << format_double(r.nll_initial) << ',' << format_double(r.nll_final) << ','
         << r.resamples << ',' << r.mixes << ',' << r.keeps << ','
         << format_double(r.millis) << '\n';
  }
  if (!file.good()) throw std::runtime_error("write failed: " + path.string());
}

std::vector<RunRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open for reading: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(file, line)) fail("empty file");
  ++line_no;
  if (line == std::string(kRecordsHeader) + "\r") line.pop_back();
  if (line != kRecordsHeader) fail("unexpected header: " + line);

  std::vector<RunRecord> records;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 12) fail("expected 12 fields, got " + std::to_string(fields.size()));
    try {
      RunRecord r;
      r.dataset_id = fields[0];
      MethodSpec spec;
      spec.kind = MethodSpec::parse_kind(fields[1]);
      if (!fields[2].empty()) spec.alpha = std::stod(fields[2]);
      if (!fields[3].empty()) spec.sample_fraction = std::stod(fields[3]);
      spec.validate();
      r.method = spec;
      r.init_seed = std::stoull(fields[4]);
      r.em_seed = std::stoull(fields[5]);
      r.nll_initial = std::stod(fields[6]);
      r.nll_final = std::stod(fields[7]);
      r.resamples = std::stoull(fields[8]);
      r.mixes = std::stoull(fields[9]);
      r.keeps = std::stoull(fields[10]);
      r.millis = std::stod(fields[11]);
      records.push_back(std::move(r));
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  return records;
}

void write_rank_table_csv(const std::filesystem::path& path, const RankTable& table) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << "method,criterion";
  for (std::size_t r = 0; r < table.methods.size(); ++r) file << ",rank_" << (r + 1);
  file << '\n';
  const std::string crit = rank_criterion_name(table.criterion);
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    file << table.methods[m] << ',' << crit;
    for (std::size_t r = 0; r < table.methods.size(); ++r)
      file << ',' << table.counts[m][r];
    file << '\n';
  }
  if (!file.good()) throw std::runtime_error("write failed: " + path.string());
}

std::string rank_table_text(const RankTable& table) {
  std::size_t label_width = 6;
  for (const auto& m : table.methods) label_width = std::max(label_width, m.size());

  std::ostringstream out;
  out << "criterion: " << rank_criterion_name(table.criterion)
      << " (datasets: " << table.dataset_count << ")\n";
  out << std::string(label_width, ' ');
  for (std::size_t r = 0; r < table.methods.size(); ++r) {
    std::string h = "#" + std::to_string(r + 1);
    out << ' ' << std::string(h.size() < 6 ? 6 - h.size() : 0, ' ') << h;
  }
  out << '\n';
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    out << table.methods[m]
        << std::string(label_width - table.methods[m].size(), ' ');
    for (std::size_t r = 0; r < table.methods.size(); ++r) {
      const std::string v = std::to_string(table.counts[m][r]);
      out << ' ' << std::string(v.size() < 6 ? 6 - v.size() : 0, ' ') << v;
    }
    out << '\n';
  }
  return out.str();
}

void export_report(const std::filesystem::path& dir,
                   const std::vector<RunRecord>& records,
                   const std::vector<RankTable>& tables, ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + dir.string());

  write_records_csv(dir / "records.csv", records);
  if (format == ReportFormat::Csv) {
    for (const auto& table : tables)
      write_rank_table_csv(
          dir / ("ranks_" + rank_criterion_name(table.criterion) + ".csv"), table);
  } else {
    const auto path = dir / "report.txt";
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i) file << '\n';
      file << rank_table_text(tables[i]);
    }
    if (!file.good()) throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace gmminit
