#include "hbs/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "hbs/error.hpp"
#include "hbs/random.hpp"

#ifndef HBS_VERSION_STRING
#define HBS_VERSION_STRING "0.0.0"
#endif

namespace hbs {

using nlohmann::json;

std::string_view library_version() noexcept { return HBS_VERSION_STRING; }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json spec_json(const AnovaSpec& spec) {
  json pairs = json::array();
  for (const auto& [a, b] : spec.interactions) pairs.push_back({a, b});
  return json{{"dims", spec.dims}, {"mains", spec.main_effects}, {"pairs", pairs},
              {"theta", spec.term_scales}};
}

AnovaSpec spec_from(const json& j, int dims) {
  AnovaSpec spec;
  spec.dims = dims;
  spec.main_effects = j.at("mains").get<std::vector<int>>();
  for (const auto& p : j.value("pairs", json::array())) {
    if (!p.is_array() || p.size() != 2) throw InvalidConfig("spec pairs must be [a, b] arrays");
    spec.interactions.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  if (j.contains("theta")) {
    spec.term_scales = j.at("theta").get<std::vector<double>>();
  } else {
    spec.term_scales.assign(spec.term_count(), 1.0);
  }
  spec.validate();
  return spec;
}

}  // namespace

// ---------------------------------------------------------------- CSV

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw IngestionError("no column named '" + std::string(name) + "'", -1, -1);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw IngestionError("line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(table.header.size()),
                           static_cast<long>(table.rows.size()), -1);
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IngestionError("CSV input has no header row", -1, -1);
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string(), -1, -1);
  return read_csv(in);
}

double parse_number(std::string_view cell, long row, long column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    throw IngestionError("non-numeric cell '" + std::string(cell) + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(column),
                         row, column);
  }
  return value;
}

IngestedData ingest_csv(const CsvTable& table, const std::string& response,
                        const std::vector<std::string>& predictors) {
  IngestedData out;
  out.response = response;
  std::vector<std::size_t> cols;
  if (!predictors.empty()) {
    out.predictors = predictors;
    for (const auto& name : predictors) cols.push_back(table.column(name));
  } else {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (table.header[j] == response) continue;
      cols.push_back(j);
      out.predictors.push_back(table.header[j]);
    }
  }
  if (cols.empty()) throw IngestionError("no predictor columns", -1, -1);
  const long ycol = response.empty() ? -1 : static_cast<long>(table.column(response));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  out.raw.resize(n, static_cast<Eigen::Index>(cols.size()));
  if (ycol >= 0) out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.raw(i, static_cast<Eigen::Index>(j)) =
          parse_number(row[cols[j]], static_cast<long>(i), static_cast<long>(cols[j]));
    }
    if (ycol >= 0) {
      out.y[i] = parse_number(row[static_cast<std::size_t>(ycol)], static_cast<long>(i), ycol);
    }
  }
  return out;
}

// ---------------------------------------------------------------- models

std::string spec_to_json(const AnovaSpec& spec) { return spec_json(spec).dump(); }

AnovaSpec spec_from_json(std::string_view text, int dims) {
  try {
    return spec_from(json::parse(text), dims);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("malformed spec: ") + e.what());
  }
}

AnovaSpec default_spec(int dims) {
  return dims >= 8 ? AnovaSpec::additive(dims) : AnovaSpec::all_pairs(dims);
}

std::string model_to_json(const ModelFile& file) {
  const FittedModel& m = file.model;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["library_version"] = std::string(library_version());
  j["spec"] = spec_json(m.spec);
  j["scaler"] = {{"lower", m.scaler.lower}, {"upper", m.scaler.upper}};
  j["predictors"] = file.predictors;
  j["response"] = file.response;
  j["basis_points"] = matrix_to_json(m.basis_points);
  j["alpha"] = vector_to_json(m.alpha);
  j["beta"] = vector_to_json(m.beta);
  j["lambda"] = m.lambda;
  j["gcv_score"] = m.gcv_score;
  j["diagnostics"] = {{"trace_A", m.diagnostics.trace_A},
                      {"condition_estimate", m.diagnostics.condition_estimate},
                      {"jitter", m.diagnostics.jitter},
                      {"grid_index", m.diagnostics.grid_index}};
  return j.dump(1) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw InvalidInput("unsupported model format_version " + std::to_string(version));
    }
    ModelFile file;
    FittedModel& m = file.model;
    m.spec = spec_from(j.at("spec"), j.at("spec").at("dims").get<int>());
    m.scaler.lower = j.at("scaler").at("lower").get<std::vector<double>>();
    m.scaler.upper = j.at("scaler").at("upper").get<std::vector<double>>();
    file.predictors = j.value("predictors", std::vector<std::string>{});
    file.response = j.value("response", std::string{});
    const auto rows = j.at("basis_points").get<std::vector<std::vector<double>>>();
    m.basis_points.resize(static_cast<Eigen::Index>(rows.size()), m.spec.dims);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != m.spec.dims) {
        throw InvalidInput("basis point has the wrong dimension");
      }
      for (int c = 0; c < m.spec.dims; ++c) m.basis_points(static_cast<Eigen::Index>(i), c) = rows[i][c];
    }
    m.alpha = vector_from_json(j.at("alpha"));
    m.beta = vector_from_json(j.at("beta"));
    m.lambda = j.at("lambda").get<double>();
    m.gcv_score = j.value("gcv_score", 0.0);
    const json& d = j.at("diagnostics");
    m.diagnostics.trace_A = d.value("trace_A", 0.0);
    m.diagnostics.condition_estimate = d.value("condition_estimate", 0.0);
    m.diagnostics.jitter = d.value("jitter", 0.0);
    m.diagnostics.grid_index = d.value("grid_index", -1);
    if (m.scaler.dims() != static_cast<std::size_t>(m.spec.dims) ||
        m.scaler.upper.size() != m.scaler.lower.size() ||
        static_cast<std::size_t>(m.alpha.size()) != m.spec.null_dim() ||
        m.beta.size() != m.basis_points.rows()) {
      throw InvalidInput("model file has inconsistent sizes");
    }
    return file;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(file));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

// ---------------------------------------------------------------- bench config

ExperimentConfig experiment_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");

  static const std::set<std::string> known{
      "distribution", "function", "n",          "n_test",        "q_grid",  "methods",
      "replicates",   "snr",      "seed",       "bins",          "full_cap", "record_timing",
      "d2_mode",      "lambda_grid"};
  std::vector<std::string> problems;
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) problems.push_back("unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  auto field = [&](const char* key, auto& target, auto convert) {
    if (!j.contains(key)) return;
    try {
      convert(j.at(key), target);
    } catch (const json::exception&) {
      problems.push_back(std::string("'") + key + "' has the wrong type");
    } catch (const Error& e) {
      problems.push_back(std::string("'") + key + "': " + e.what());
    }
  };
  auto as = [](const json& v, auto& t) { v.get_to(t); };
  auto positive_size = [](const json& v, std::size_t& t) {
    if (!v.is_number_unsigned()) throw json::type_error::create(302, "expected unsigned", nullptr);
    v.get_to(t);
  };

  field("distribution", cfg.distribution,
        [](const json& v, Distribution& t) { t = parse_distribution(v.get<std::string>()); });
  field("function", cfg.function,
        [](const json& v, TestFunction& t) { t = parse_function(v.get<std::string>()); });
  field("n", cfg.n, positive_size);
  field("n_test", cfg.n_test, [](const json& v, std::optional<std::size_t>& t) {
    if (!v.is_null()) t = v.get<std::size_t>();
  });
  field("q_grid", cfg.q_grid, as);
  field("methods", cfg.methods, [](const json& v, std::vector<Method>& t) {
    t.clear();
    for (const auto& m : v) t.push_back(parse_method(m.get<std::string>()));
  });
  field("replicates", cfg.replicates, positive_size);
  field("snr", cfg.snr, as);
  field("seed", cfg.seed, as);
  field("bins", cfg.bins, [](const json& v, std::optional<std::size_t>& t) {
    if (!v.is_null()) t = v.get<std::size_t>();
  });
  field("full_cap", cfg.full_cap, positive_size);
  field("record_timing", cfg.record_timing, as);
  field("d2_mode", cfg.mixture, [](const json& v, MixtureMode& t) {
    const auto s = v.get<std::string>();
    if (s == "mixture") {
      t = MixtureMode::Mixture;
    } else if (s == "average") {
      t = MixtureMode::Average;
    } else {
      throw InvalidConfig("must be \"mixture\" or \"average\"");
    }
  });
  field("lambda_grid", cfg.grid, [](const json& v, LambdaGrid& g) {
    g.log10_lo = v.value("log10_lo", g.log10_lo);
    g.log10_hi = v.value("log10_hi", g.log10_hi);
    g.count = v.value("count", g.count);
  });

  if (problems.empty()) {
    try {
      cfg.validate();
    } catch (const InvalidConfig& e) {
      problems.emplace_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "config schema errors:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidConfig(msg);
  }
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["distribution"] = std::string(distribution_name(cfg.distribution));
  j["function"] = std::string(function_name(cfg.function));
  j["n"] = cfg.n;
  j["n_test"] = cfg.test_size();
  j["q_grid"] = cfg.q_grid;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(method_name(m)));
  j["methods"] = methods;
  j["replicates"] = cfg.replicates;
  j["snr"] = cfg.snr;
  j["seed"] = cfg.seed;
  j["bins"] = cfg.bins ? json(*cfg.bins) : json(nullptr);
  j["full_cap"] = cfg.full_cap;
  j["record_timing"] = cfg.record_timing;
  j["d2_mode"] = cfg.mixture == MixtureMode::Mixture ? "mixture" : "average";
  j["lambda_grid"] = {{"log10_lo", cfg.grid.log10_lo},
                      {"log10_hi", cfg.grid.log10_hi},
                      {"count", cfg.grid.count}};
  return j.dump();
}

// ---------------------------------------------------------------- manifests

std::string RunManifest::to_json() const {
  json j{{"command", command}, {"config_hash", config_hash},
         {"seed", seed},       {"version", version},
         {"started", started}, {"finished", finished},
         {"warnings", warnings}};
  return j.dump(1) + "\n";
}

std::string config_hash(std::string_view canonical) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << tag(canonical);
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string(), -1, -1);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write " + path.string(), -1, -1);
  out << text;
  if (!out) throw IngestionError("write failed for " + path.string(), -1, -1);
}

}  // namespace hbs
