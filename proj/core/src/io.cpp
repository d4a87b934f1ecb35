#include "gmminit/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gmminit {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0';
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open for reading: " + path.string());
  return file;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  return file;
}

MethodSpec method_from_kind_name(const std::string& name) {
  const MethodKind kind = MethodSpec::parse_kind(name);
  switch (kind) {
    case MethodKind::Adaptive: return MethodSpec::adaptive(0.5);
    case MethodKind::GonzalezForGmm: return MethodSpec::gonzalez_for_gmm(0.1);
    case MethodKind::KwedlosGonzalez: return MethodSpec::kwedlos_gonzalez(0.1);
    case MethodKind::Agglomerative: return MethodSpec::agglomerative(0.1);
    default: return MethodSpec{kind, {}, {}};
  }
}

}  // namespace

CsvDataset read_points_csv(const std::filesystem::path& path,
                           std::optional<std::size_t> label_column) {
  auto file = open_input(path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  bool had_header = false;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);

    if (rows.empty() && !had_header) {
      bool numeric = true;
      double v;
      for (const auto& f : fields)
        if (!parse_double(f, v)) {
          numeric = false;
          break;
        }
      if (!numeric) {
        had_header = true;
        width = fields.size();
        continue;
      }
    }

    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError(path, line_no,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));
    if (label_column && *label_column >= width)
      throw ParseError(path, line_no,
                       "label column " + std::to_string(*label_column) +
                           " out of range for width " + std::to_string(width));

    std::vector<double> row;
    row.reserve(width);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v;
      if (!parse_double(fields[i], v))
        throw ParseError(path, line_no, "not a number: '" + fields[i] + "'");
      if (label_column && i == *label_column)
        labels.push_back(static_cast<int>(v));
      else
        row.push_back(v);
    }
    if (row.empty()) throw ParseError(path, line_no, "row has no feature columns");
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError(path, line_no, "no data rows");

  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  return CsvDataset{DataMatrix(std::move(points)), std::move(labels), had_header};
}

void write_points_csv(const std::filesystem::path& path, const DataMatrix& data,
                      const std::vector<int>* labels) {
  if (labels && labels->size() != data.size())
    throw std::invalid_argument("write_points_csv: label count differs from row count");
  auto file = open_output(path);
  const auto& m = data.points();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) file << ',';
      file << format_double(m(i, j));
    }
    if (labels) file << ',' << (*labels)[static_cast<std::size_t>(i)];
    file << '\n';
  }
  if (!file.good()) throw std::runtime_error("write failed: " + path.string());
}

void write_model_json(const std::filesystem::path& path, const GmmParams& theta) {
  json j;
  j["k"] = theta.size();
  j["d"] = theta.dim();
  auto& weights = j["weights"] = json::array();
  auto& means = j["means"] = json::array();
  auto& covariances = j["covariances"] = json::array();
  for (const auto& c : theta.components()) {
    weights.push_back(c.weight());
    json mean = json::array();
    for (Eigen::Index i = 0; i < c.mean().size(); ++i) mean.push_back(c.mean()[i]);
    means.push_back(std::move(mean));
    json cov = json::array();
    for (Eigen::Index r = 0; r < c.covariance().rows(); ++r)
      for (Eigen::Index s = 0; s < c.covariance().cols(); ++s)
        cov.push_back(c.covariance()(r, s));
    covariances.push_back(std::move(cov));
  }
  auto file = open_output(path);
  file << j.dump(2) << '\n';
  if (!file.good()) throw std::runtime_error("write failed: " + path.string());
}

GmmParams read_model_json(const std::filesystem::path& path) {
  auto file = open_input(path);
  json j;
  try {
    file >> j;
    const std::size_t k = j.at("k").get<std::size_t>();
    const std::size_t d = j.at("d").get<std::size_t>();
    const auto& weights = j.at("weights");
    const auto& means = j.at("means");
    const auto& covariances = j.at("covariances");
    if (weights.size() != k || means.size() != k || covariances.size() != k)
      throw std::runtime_error("component count mismatch with k");

    std::vector<GaussianComponent> comps;
    comps.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (means[c].size() != d) throw std::runtime_error("mean size mismatch with d");
      if (covariances[c].size() != d * d)
        throw std::runtime_error("covariance size mismatch with d*d");
      Eigen::VectorXd mean(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) mean[static_cast<Eigen::Index>(i)] = means[c][i];
      Eigen::MatrixXd cov(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t s = 0; s < d; ++s)
          cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
              covariances[c][r * d + s];
      comps.emplace_back(weights[c].get<double>(), std::move(mean), std::move(cov));
    }
    return GmmParams(std::move(comps));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_trace_csv(const std::filesystem::path& path, const EmTrace& trace) {
  auto file = open_output(path);
  file << "round,nll\n";
  for (std::size_t r = 0; r < trace.log_likelihood.size(); ++r)
    file << (r + 1) << ',' << format_double(-trace.log_likelihood[r]) << '\n';
  if (!file.good()) throw std::runtime_error("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto file = open_input(path);
  json j;
  try {
    file >> j;
    Manifest m;
    m.k = j.value("k", m.k);
    m.rounds = j.value("rounds", m.rounds);
    m.init_seeds = j.value("init_seeds", m.init_seeds);
    m.em_seeds = j.value("em_seeds", m.em_seeds);
    m.seed = j.value("seed", m.seed);
    if (m.k < 1 || m.rounds < 1 || m.init_seeds < 1 || m.em_seeds < 1)
      throw std::runtime_error("k, rounds, init_seeds, em_seeds must all be >= 1");

    if (!j.contains("datasets") || !j.at("datasets").is_array() ||
        j.at("datasets").empty())
      throw std::runtime_error("manifest needs a non-empty 'datasets' array");
    for (const auto& entry : j.at("datasets")) {
      ManifestEntry e;
      if (entry.is_string()) {
        e.path = entry.get<std::string>();
      } else {
        e.path = entry.at("path").get<std::string>();
        if (entry.contains("id")) e.id = entry.at("id").get<std::string>();
        if (entry.contains("label_column"))
          e.label_column = entry.at("label_column").get<std::size_t>();
      }
      if (e.id.empty()) e.id = std::filesystem::path(e.path).stem().string();
      m.datasets.push_back(std::move(e));
    }

    if (j.contains("methods")) {
      for (const auto& entry : j.at("methods")) {
        MethodSpec spec;
        if (entry.is_string()) {
          spec = method_from_kind_name(entry.get<std::string>());
        } else {
          spec.kind = MethodSpec::parse_kind(entry.at("kind").get<std::string>());
          if (entry.contains("alpha")) spec.alpha = entry.at("alpha").get<double>();
          if (entry.contains("s")) spec.sample_fraction = entry.at("s").get<double>();
        }
        spec.validate();
        m.methods.push_back(spec);
      }
      if (m.methods.empty())
        throw std::runtime_error("manifest 'methods' array must not be empty");
    } else {
      m.methods = MethodSpec::paper_roster();
    }
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace gmminit
