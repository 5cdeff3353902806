#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "hbs/basis_selection.hpp"
#include "hbs/error.hpp"
#include "hbs/format.hpp"
#include "hbs/hilbert_curve.hpp"
#include "hbs/io.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/synthetic.hpp"
#include "hbs/theory.hpp"

namespace hbs::cli {
namespace {

struct FitArgs {
  std::string data;
  std::string response;
  std::vector<std::string> predictors;
  std::string method = "hbs";
  std::size_t q = 0;
  std::optional<std::size_t> bins;
  std::optional<int> order;
  std::string spec;
  std::optional<double> lambda;
  bool gcv = false;
  std::uint64_t seed = 0;
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

struct BenchArgs {
  std::string config;
  std::string out;
  std::optional<int> jobs;
};

struct TheoryArgs {
  std::string dist;
  int dim = 2;
  std::string out;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> n;
  std::optional<std::size_t> reference_points;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

struct HilbertArgs {
  int d = 0;
  int k = 0;
  std::vector<std::uint64_t> cell;
  std::uint64_t index = 0;
  std::vector<double> point;
};

int jobs_from_env() {
  const char* env = std::getenv("HBS_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  int value = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, value);
  if (res.ec != std::errc() || res.ptr != end || value < 1) {
    throw InvalidConfig("HBS_JOBS must be a positive integer, got '" + std::string(env) + "'");
  }
  return value;
}

int resolve_jobs(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 1) throw InvalidConfig("--jobs must be positive");
    return *flag;
  }
  return jobs_from_env();
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(RunManifest& manifest, const std::string& out) {
  manifest.finished = utc_timestamp();
  write_text_file(manifest_path(out), manifest.to_json());
}

AnovaSpec load_spec(const std::string& arg, int dims) {
  const bool inline_json = arg.find('{') != std::string::npos;
  return spec_from_json(inline_json ? arg : read_text_file(arg), dims);
}

int run_fit(const FitArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "fit";
  manifest.seed = a.seed;
  manifest.started = utc_timestamp();

  const Method method = parse_method(a.method);
  if (method != Method::Full && a.q == 0) throw InvalidConfig("--q is required for " + a.method);

  const CsvTable table = read_csv_file(a.data);
  const IngestedData ing = ingest_csv(table, a.response, a.predictors);
  const Dataset data = scale_to_unit_cube(ing.raw, ing.y);
  const int d = static_cast<int>(data.d());

  SelectionConfig sc;
  sc.q = method == Method::Full ? data.n() : a.q;
  sc.bins = a.bins;
  sc.curve_order = a.order;
  sc.method = method;
  sc.seed = a.seed;
  const BasisSelection sel = select_basis(data, sc);

  AnovaSpec spec = a.spec.empty() ? default_spec(d) : load_spec(a.spec, d);
  if (a.spec.empty() && d >= 8) {
    manifest.warnings.push_back("d >= 8: default spec is additive; pass --spec for interactions");
  }

  FitOptions options;
  options.lambda = a.lambda;
  ModelFile file{fit_model(data, sel, spec, options), ing.predictors, ing.response};
  save_model(file, a.out);

  const FittedModel& m = file.model;
  if (m.diagnostics.jitter > 0.0) {
    manifest.warnings.push_back("jitter escalation: relative ridge " + format_double(m.diagnostics.jitter));
  }
  if (method != Method::Full) {
    const double c5 = condition5_diagnostic(data, sc);
    if (c5 > kCondition5WarnLevel) {
      manifest.warnings.push_back("condition5 diagnostic " + format_double(c5) + " exceeds " +
                                  format_double(kCondition5WarnLevel));
    }
  }
  if (sel.redistributed > 0) {
    manifest.warnings.push_back("quota redistributed for " + std::to_string(sel.redistributed) +
                                " basis points");
  }

  nlohmann::json canonical{{"command", "fit"},
                           {"data", a.data},
                           {"response", a.response},
                           {"predictors", ing.predictors},
                           {"method", std::string(method_name(method))},
                           {"q", sc.q},
                           {"bins", sc.bin_count()},
                           {"order", sel.curve_order},
                           {"spec", spec_to_json(spec)},
                           {"lambda", a.lambda ? nlohmann::json(*a.lambda) : nlohmann::json("gcv")},
                           {"seed", a.seed}};
  manifest.config_hash = config_hash(canonical.dump());
  write_manifest(manifest, a.out);

  out << "fitted " << method_name(method) << " with q = " << sel.size() << ", lambda = "
      << format_double(m.lambda) << ", gcv = " << format_double(m.gcv_score) << '\n';
  return kOk;
}

int run_predict(const PredictArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "predict";
  manifest.started = utc_timestamp();

  const ModelFile file = load_model(a.model);
  const CsvTable table = read_csv_file(a.data);
  const IngestedData ing = ingest_csv(table, "", file.predictors);
  if (ing.raw.cols() != file.model.basis_points.cols()) {
    throw InvalidInput("data has " + std::to_string(ing.raw.cols()) + " predictor columns, model expects " +
                       std::to_string(file.model.basis_points.cols()));
  }
  const Prediction pred = predict(file.model, ing.raw);

  std::ostringstream csv;
  std::string column = "prediction";
  while (std::find(table.header.begin(), table.header.end(), column) != table.header.end()) {
    column += "_";
  }
  for (const auto& h : table.header) csv << h << ',';
  csv << column << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (const auto& cell : table.rows[i]) csv << cell << ',';
    csv << format_double(pred.values[static_cast<Eigen::Index>(i)]) << '\n';
  }
  write_text_file(a.out, csv.str());

  if (pred.clamped > 0) {
    manifest.warnings.push_back(std::to_string(pred.clamped) +
                                " scaled coordinates clamped into [0,1]");
  }
  manifest.config_hash = config_hash(nlohmann::json{{"command", "predict"},
                                                    {"model", a.model},
                                                    {"data", a.data}}
                                         .dump());
  write_manifest(manifest, a.out);
  out << "wrote " << table.rows.size() << " predictions";
  if (pred.clamped > 0) out << " (" << pred.clamped << " coordinates clamped)";
  out << '\n';
  return kOk;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "bench";
  manifest.started = utc_timestamp();

  const ExperimentConfig cfg = experiment_config_from_json(read_text_file(a.config));
  const int jobs = resolve_jobs(a.jobs);
  manifest.seed = cfg.seed;
  manifest.config_hash = config_hash(experiment_config_to_json(cfg));

  const ExperimentResult result = run_experiment(cfg, jobs);
  std::ostringstream csv;
  write_results_csv(result, csv, cfg.record_timing);
  write_text_file(a.out, csv.str());

  std::size_t failed = 0;
  std::size_t flagged = 0;
  for (const auto& row : result.rows) {
    if (!row.ok) ++failed;
    if (row.cond5 > kCondition5WarnLevel) ++flagged;
  }
  if (failed > 0) manifest.warnings.push_back(std::to_string(failed) + " cells failed");
  if (flagged > 0) {
    manifest.warnings.push_back(std::to_string(flagged) + " rows with condition5 diagnostic above " +
                                format_double(kCondition5WarnLevel));
  }
  write_manifest(manifest, a.out);
  out << "wrote " << result.rows.size() << " rows (" << failed << " failed), sigma = "
      << format_double(result.sigma) << '\n';
  return kOk;
}

int run_theory(const TheoryArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "theory";
  manifest.started = utc_timestamp();

  std::string upper = a.dist;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  ScalingStudyConfig cfg;
  cfg.distribution = parse_distribution(upper);
  if (a.dim < 1 || a.dim > 16) {
    throw InvalidConfig("--dim must be in [1, 16] for " + upper + ", got " + std::to_string(a.dim));
  }
  cfg.dims = a.dim;
  std::vector<int> phi(static_cast<std::size_t>(a.dim), 0);
  std::vector<int> psi(static_cast<std::size_t>(a.dim), 0);
  phi[0] = 1;
  if (a.dim >= 2) {
    psi[1] = 1;
  } else {
    psi[0] = 2;
  }
  cfg.phi = EigenSurrogate{phi};
  cfg.psi = EigenSurrogate{psi};
  // Windows sit +-0.3 around the expected exponents -1 - 2/d and -1.
  const double expected = -1.0 - 2.0 / a.dim;
  cfg.stratified_lo = expected - 0.3;
  cfg.stratified_hi = expected + 0.3;
  if (a.replicates) cfg.replicates = *a.replicates;
  if (a.n) cfg.n = *a.n;
  if (a.reference_points) cfg.reference_points = *a.reference_points;
  if (a.seed) cfg.seed = *a.seed;
  cfg.jobs = resolve_jobs(a.jobs);
  cfg.validate();
  manifest.seed = cfg.seed;

  const ScalingReport report = variance_scaling_study(cfg);
  std::ostringstream csv;
  write_scaling_csv(report, csv);
  write_text_file(a.out, csv.str());

  if (report.clamped > 0) {
    manifest.warnings.push_back(std::to_string(report.clamped) + " coordinates clamped into [0,1]");
  }
  manifest.config_hash = config_hash(nlohmann::json{{"command", "theory"},
                                                    {"dist", upper},
                                                    {"dim", cfg.dims},
                                                    {"replicates", cfg.replicates},
                                                    {"n", cfg.n},
                                                    {"reference_points", cfg.reference_points},
                                                    {"q", cfg.q_list},
                                                    {"seed", cfg.seed}}
                                         .dump());
  write_manifest(manifest, a.out);
  out << report.summary(cfg) << '\n';
  return kOk;
}

int run_hilbert(const std::string& action, const HilbertArgs& a, std::ostream& out) {
  const CurveOrder order(a.d, a.k);
  if (action == "encode") {
    out << encode(CellCoord{a.cell}, order).value << '\n';
  } else if (action == "decode") {
    const CellCoord cell = decode(HilbertIndex{a.index}, order);
    for (std::size_t j = 0; j < cell.coords.size(); ++j) {
      out << (j ? " " : "") << cell.coords[j];
    }
    out << '\n';
  } else {
    out << point_to_index(a.point, order).value << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smoothing-spline ANOVA with Hilbert-curve basis selection", "hbs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Select a basis and fit a model from CSV data");
  fit_cmd->add_option("--data", fit.data, "Training CSV (header required)")->required();
  fit_cmd->add_option("--response", fit.response, "Response column")->required();
  fit_cmd->add_option("--predictors", fit.predictors, "Predictor columns (default: all others)")
      ->delimiter(',');
  fit_cmd->add_option("--method", fit.method, "hbs|ubs|abs|sbs|full")->capture_default_str();
  fit_cmd->add_option("--q", fit.q, "Basis size");
  fit_cmd->add_option("--C", fit.bins, "Curve bins for hbs (default q)");
  fit_cmd->add_option("--k", fit.order, "Curve order");
  fit_cmd->add_option("--spec", fit.spec, "ANOVA spec as JSON text or a path to a JSON file");
  auto* lambda_opt = fit_cmd->add_option("--lambda", fit.lambda, "Fixed smoothing parameter");
  auto* gcv_flag = fit_cmd->add_flag("--gcv", fit.gcv, "Choose lambda by GCV (default)");
  lambda_opt->excludes(gcv_flag);
  fit_cmd->add_option("--seed", fit.seed, "Selection seed")->required();
  fit_cmd->add_option("--out", fit.out, "Model file to write")->required();

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Append predictions to a CSV");
  pred_cmd->add_option("--model", pred.model)->required();
  pred_cmd->add_option("--data", pred.data)->required();
  pred_cmd->add_option("--out", pred.out)->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a synthetic benchmark from a JSON config");
  bench_cmd->add_option("--config", bench.config)->required();
  bench_cmd->add_option("--out", bench.out)->required();
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads (default $HBS_JOBS or 1)");

  TheoryArgs theory;
  auto* theory_cmd = app.add_subcommand("theory", "Integration-error scaling study");
  theory_cmd->add_option("--dist", theory.dist, "d1|d2|d3|d4")->required();
  theory_cmd->add_option("--dim", theory.dim)->required();
  theory_cmd->add_option("--out", theory.out)->required();
  theory_cmd->add_option("--replicates", theory.replicates);
  theory_cmd->add_option("--n", theory.n, "Sample size per replicate");
  theory_cmd->add_option("--reference-points", theory.reference_points);
  theory_cmd->add_option("--seed", theory.seed);
  theory_cmd->add_option("--jobs", theory.jobs);

  HilbertArgs hil;
  auto* hil_cmd = app.add_subcommand("hilbert", "Hilbert curve encode/decode");
  hil_cmd->require_subcommand(1);
  auto add_order = [&](CLI::App* sub) {
    sub->add_option("--d", hil.d, "Dimension")->required();
    sub->add_option("--k", hil.k, "Bits per coordinate")->required();
  };
  auto* enc = hil_cmd->add_subcommand("encode", "Cell coordinates to curve index");
  add_order(enc);
  enc->add_option("--cell", hil.cell)->required();
  auto* dec = hil_cmd->add_subcommand("decode", "Curve index to cell coordinates");
  add_order(dec);
  dec->add_option("--index", hil.index)->required();
  auto* idx = hil_cmd->add_subcommand("index", "Point in [0,1]^d to curve index");
  add_order(idx);
  idx->add_option("--point", hil.point)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit, out);
    if (*pred_cmd) return run_predict(pred, out);
    if (*bench_cmd) return run_bench(bench, out);
    if (*theory_cmd) return run_theory(theory, out);
    if (*enc) return run_hilbert("encode", hil, out);
    if (*dec) return run_hilbert("decode", hil, out);
    return run_hilbert("index", hil, out);
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SingularSystem& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const IngestionError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidInput& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace hbs::cli
