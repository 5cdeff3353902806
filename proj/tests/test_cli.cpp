#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "hbs/format.hpp"
#include "hbs/io.hpp"
#include "hbs/pls_solver.hpp"
#include "hbs/synthetic.hpp"

namespace hbs {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result hbs_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("hbs_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Raw D4 design with an F1 response plus noise, written with exact digits.
  std::string write_training(std::size_t n, std::uint64_t seed, Matrix* raw_out = nullptr,
                             Vector* y_out = nullptr) {
    const Matrix raw = gen_design(Distribution::D4, n, 2, seed);
    const Dataset scaled = scale_to_unit_cube(raw, Vector());
    Vector y = eval_function(TestFunction::F1, scaled.X);
    CounterRng rng(seed + 17);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.3 * rng.normal();
    std::ostringstream csv;
    csv << "x1,x2,y\n";
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      csv << format_double(raw(i, 0)) << ',' << format_double(raw(i, 1)) << ','
          << format_double(y[i]) << '\n';
    }
    const std::string p = path("train.csv");
    write_text_file(p, csv.str());
    if (raw_out) *raw_out = raw;
    if (y_out) *y_out = y;
    return p;
  }

  std::vector<double> predictions(const std::string& csv_path) const {
    const IngestedData d = ingest_csv(read_csv_file(csv_path), "prediction", {"x1"});
    return {d.y.data(), d.y.data() + d.y.size()};
  }

  fs::path dir_;
};

TEST(CliHilbert, DecodeExamples) {
  Result r = hbs_cli({"hilbert", "decode", "--d", "2", "--k", "1", "--index", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0 0\n");
  r = hbs_cli({"hilbert", "decode", "--d", "1", "--k", "4", "--index", "9"});
  EXPECT_EQ(r.out, "9\n");
  r = hbs_cli({"hilbert", "decode", "--d", "2", "--k", "1", "--index", "1"});
  EXPECT_EQ(r.out, "0 1\n");
}

TEST(CliHilbert, EncodeDecodeScripted) {
  for (int i = 0; i < 64; ++i) {
    const Result dec = hbs_cli({"hilbert", "decode", "--d", "2", "--k", "3", "--index",
                                std::to_string(i)});
    ASSERT_EQ(dec.code, 0);
    std::istringstream coords(dec.out);
    std::string a, b;
    coords >> a >> b;
    const Result enc = hbs_cli({"hilbert", "encode", "--d", "2", "--k", "3", "--cell", a, b});
    ASSERT_EQ(enc.code, 0) << enc.err;
    EXPECT_EQ(enc.out, std::to_string(i) + "\n");
  }
}

TEST(CliHilbert, IndexAndRangeErrors) {
  Result r = hbs_cli({"hilbert", "index", "--d", "2", "--k", "1", "--point", "0.9", "0.1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3\n");
  r = hbs_cli({"hilbert", "decode", "--d", "2", "--k", "1", "--index", "4"});
  EXPECT_EQ(r.code, cli::kDataError);
  r = hbs_cli({"hilbert", "index", "--d", "2", "--k", "1", "--point", "1.5", "0.1"});
  EXPECT_EQ(r.code, cli::kDataError);
}

TEST(CliUsage, ExitCodes) {
  EXPECT_EQ(hbs_cli({}).code, cli::kUsage);
  EXPECT_EQ(hbs_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(hbs_cli({"hilbert", "decode", "--d", "2"}).code, cli::kUsage);
  EXPECT_EQ(hbs_cli({"--help"}).code, cli::kOk);
  const Result v = hbs_cli({"--version"});
  EXPECT_EQ(v.code, cli::kOk);
  EXPECT_NE(v.out.find(std::string(library_version())), std::string::npos);
}

TEST_F(CliTest, FitPredictRoundTrip) {
  Matrix raw;
  Vector y;
  const std::string train = write_training(150, 4, &raw, &y);
  const std::string model = path("model.json");
  const Result fit = hbs_cli({"fit", "--data", train, "--response", "y", "--method", "hbs",
                              "--q", "30", "--seed", "11", "--out", model});
  ASSERT_EQ(fit.code, 0) << fit.err;
  EXPECT_TRUE(fs::exists(model + ".manifest.json"));

  // The same pipeline in memory.
  const Dataset data = scale_to_unit_cube(raw, y);
  SelectionConfig sc;
  sc.q = 30;
  sc.seed = 11;
  const BasisSelection sel = hbs_select(data, sc);
  const FittedModel mem = fit_model(data, sel, default_spec(2));
  const Vector fitted = predict_unit(mem, data.X);

  const std::string out = path("pred.csv");
  const Result pred = hbs_cli({"predict", "--model", model, "--data", train, "--out", out});
  ASSERT_EQ(pred.code, 0) << pred.err;
  const std::vector<double> p = predictions(out);
  ASSERT_EQ(p.size(), 150u);
  const FittedModel loaded = load_model(model).model;
  const Vector lib = predict(loaded, raw).values;
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(p[i], fitted[static_cast<Eigen::Index>(i)], 1e-8);
    EXPECT_NEAR(p[i], lib[static_cast<Eigen::Index>(i)], 1e-10);
  }

  // Determinism: identical model bytes on rerun.
  const std::string again = path("model2.json");
  ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--method", "hbs", "--q", "30",
                     "--seed", "11", "--out", again})
                .code,
            0);
  EXPECT_EQ(read_text_file(model), read_text_file(again));
}

TEST_F(CliTest, UbsWithAllRowsEqualsFullFit) {
  const std::string train = write_training(40, 8);
  ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--method", "ubs", "--q", "40",
                     "--seed", "2", "--lambda", "1e-4", "--out", path("ubs.json")})
                .code,
            0);
  ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--method", "full", "--seed",
                     "2", "--lambda", "1e-4", "--out", path("full.json")})
                .code,
            0);
  ASSERT_EQ(hbs_cli({"predict", "--model", path("ubs.json"), "--data", train, "--out",
                     path("ubs.csv")})
                .code,
            0);
  ASSERT_EQ(hbs_cli({"predict", "--model", path("full.json"), "--data", train, "--out",
                     path("full.csv")})
                .code,
            0);
  const auto a = predictions(path("ubs.csv"));
  const auto b = predictions(path("full.csv"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8 * (1.0 + std::abs(b[i])));
}

TEST_F(CliTest, PredictEmptyAndRowOrder) {
  const std::string train = write_training(80, 5);
  const std::string model = path("m.json");
  ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--q", "20", "--seed", "1",
                     "--out", model})
                .code,
            0);

  write_text_file(path("empty.csv"), "x1,x2\n");
  ASSERT_EQ(hbs_cli({"predict", "--model", model, "--data", path("empty.csv"), "--out",
                     path("empty_pred.csv")})
                .code,
            0);
  EXPECT_EQ(read_text_file(path("empty_pred.csv")), "x1,x2,prediction\n");

  // Reverse the data rows and compare predictions row by row.
  const CsvTable t = read_csv_file(train);
  std::string forward = "x1,x2\n", backward = "x1,x2\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    forward += t.rows[i][0] + "," + t.rows[i][1] + "\n";
    const auto& r = t.rows[t.rows.size() - 1 - i];
    backward += r[0] + "," + r[1] + "\n";
  }
  write_text_file(path("fwd.csv"), forward);
  write_text_file(path("bwd.csv"), backward);
  ASSERT_EQ(hbs_cli({"predict", "--model", model, "--data", path("fwd.csv"), "--out",
                     path("fwd_pred.csv")})
                .code,
            0);
  ASSERT_EQ(hbs_cli({"predict", "--model", model, "--data", path("bwd.csv"), "--out",
                     path("bwd_pred.csv")})
                .code,
            0);
  const auto f = predictions(path("fwd_pred.csv"));
  const auto b = predictions(path("bwd_pred.csv"));
  ASSERT_EQ(f.size(), b.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], b[b.size() - 1 - i]);
}

TEST_F(CliTest, DataErrors) {
  write_text_file(path("bad.csv"), "x1,x2,y\n1,2,3\n4,oops,6\n7,8,9\n");
  Result r = hbs_cli({"fit", "--data", path("bad.csv"), "--response", "y", "--q", "2", "--seed",
                      "1", "--out", path("m.json")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("row 1, column 1"), std::string::npos) << r.err;

  r = hbs_cli({"fit", "--data", path("bad.csv"), "--response", "nope", "--q", "2", "--seed", "1",
               "--out", path("m.json")});
  EXPECT_EQ(r.code, cli::kDataError);

  r = hbs_cli({"fit", "--data", path("missing.csv"), "--response", "y", "--q", "2", "--seed",
               "1", "--out", path("m.json")});
  EXPECT_EQ(r.code, cli::kDataError);

  const std::string train = write_training(30, 3);
  r = hbs_cli({"fit", "--data", train, "--response", "y", "--q", "31", "--seed", "1", "--out",
               path("m.json")});
  EXPECT_EQ(r.code, cli::kUsage);
  r = hbs_cli({"fit", "--data", train, "--response", "y", "--method", "xbs", "--q", "5",
               "--seed", "1", "--out", path("m.json")});
  EXPECT_EQ(r.code, cli::kUsage);
  r = hbs_cli({"fit", "--data", train, "--response", "y", "--q", "5", "--lambda", "1e-3",
               "--gcv", "--seed", "1", "--out", path("m.json")});
  EXPECT_EQ(r.code, cli::kUsage);

  // Model expecting two predictors applied to one-column data.
  ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--q", "5", "--seed", "1",
                     "--out", path("m.json")})
                .code,
            0);
  write_text_file(path("one.csv"), "x1\n0.5\n");
  r = hbs_cli({"predict", "--model", path("m.json"), "--data", path("one.csv"), "--out",
               path("p.csv")});
  EXPECT_EQ(r.code, cli::kDataError);

  write_text_file(path("future.json"), "{\"format_version\": 99}");
  r = hbs_cli({"predict", "--model", path("future.json"), "--data", train, "--out",
               path("p.csv")});
  EXPECT_EQ(r.code, cli::kDataError);
}

TEST_F(CliTest, BenchSingleCellAndJobs) {
  write_text_file(path("cfg.json"),
                  R"({"distribution": "D1", "function": "F1", "n": 200, "q_grid": [20],
                      "methods": ["HBS"], "replicates": 1, "seed": 5})");
  Result r = hbs_cli({"bench", "--config", path("cfg.json"), "--out", path("one.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable t = read_csv_file(path("one.csv"));
  EXPECT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(fs::exists(path("one.csv") + ".manifest.json"));

  write_text_file(path("cfg4.json"),
                  R"({"distribution": "D4", "function": "F1", "n": 150, "q_grid": [10, 20],
                      "methods": ["HBS", "UBS", "ABS", "SBS"], "replicates": 3, "seed": 9,
                      "record_timing": false})");
  ASSERT_EQ(hbs_cli({"bench", "--config", path("cfg4.json"), "--out", path("j1.csv"), "--jobs",
                     "1"})
                .code,
            0);
  ASSERT_EQ(hbs_cli({"bench", "--config", path("cfg4.json"), "--out", path("j8.csv"), "--jobs",
                     "8"})
                .code,
            0);
  EXPECT_EQ(read_text_file(path("j1.csv")), read_text_file(path("j8.csv")));
  EXPECT_EQ(read_csv_file(path("j1.csv")).rows.size(), 24u);

  write_text_file(path("bad.json"), R"({"n": "many", "shape": 1})");
  r = hbs_cli({"bench", "--config", path("bad.json"), "--out", path("x.csv")});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("shape"), std::string::npos);
  EXPECT_NE(r.err.find("'n'"), std::string::npos);
}

TEST_F(CliTest, TheoryRowCountAndSummary) {
  const Result r = hbs_cli({"theory", "--dist", "d1", "--dim", "2", "--out", path("t.csv"),
                            "--replicates", "5", "--n", "3000", "--reference-points", "4096"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.starts_with("PASS") || r.out.starts_with("FAIL")) << r.out;
  EXPECT_EQ(read_csv_file(path("t.csv")).rows.size(), 12u);
  EXPECT_TRUE(fs::exists(path("t.csv") + ".manifest.json"));
  EXPECT_EQ(hbs_cli({"theory", "--dist", "d9", "--dim", "2", "--out", path("t.csv")}).code,
            cli::kUsage);
  EXPECT_EQ(hbs_cli({"theory", "--dist", "d1", "--dim", "0", "--out", path("t.csv")}).code,
            cli::kUsage);
}

TEST_F(CliTest, ManifestReproducibleFields) {
  const std::string train = write_training(60, 2);
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(hbs_cli({"fit", "--data", train, "--response", "y", "--q", "10", "--seed", "3",
                       "--out", path(name)})
                  .code,
              0);
  }
  auto strip_times = [](std::string s) {
    std::string out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) {
      if (line.find("\"started\"") == std::string::npos &&
          line.find("\"finished\"") == std::string::npos) {
        out += line + "\n";
      }
    }
    return out;
  };
  const std::string a = read_text_file(path("a.json.manifest.json"));
  const std::string b = read_text_file(path("b.json.manifest.json"));
  EXPECT_NE(a.find("\"config_hash\""), std::string::npos);
  EXPECT_EQ(strip_times(a), strip_times(b));
}

}  // namespace
}  // namespace hbs
