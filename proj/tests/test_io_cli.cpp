#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "gamma_glm/cli.hpp"
#include "gamma_glm/design.hpp"
#include "gamma_glm/fista.hpp"
#include "gamma_glm/io.hpp"
#include "gamma_glm/lambda_path.hpp"
#include "oracles.hpp"

using namespace gamma_glm;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("gamma_glm_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "gamma_glm");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST(Csv, HeaderIsDetectedFromNonNumericFirstLine) {
  const NumericTable t = parse_numeric_csv("b,x1\n1.5,2\n\n3,-4e-2\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"b", "x1"}));
  ASSERT_EQ(t.values.rows(), 2);
  EXPECT_EQ(t.values(1, 1), -0.04);

  const NumericTable bare = parse_numeric_csv("1,2\r\n3,4\r\n");
  EXPECT_TRUE(bare.header.empty());
  EXPECT_EQ(bare.values.rows(), 2);
  EXPECT_EQ(bare.values(1, 0), 3.0);
}

TEST(Csv, MalformedInputNamesLineAndColumn) {
  try {
    parse_numeric_csv("b,x1\n1,2\n3\n");
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 0u);
  }
  try {
    parse_numeric_csv("1,2\n3,abc\n");
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 2u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
  EXPECT_THROW(parse_numeric_csv("b,x\n"), CsvError);
  EXPECT_THROW(parse_numeric_csv("1,2,\n"), CsvError);
}

TEST(Csv, CombinedRoundTripIsExact) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(12));
    const int p = 1 + static_cast<int>(rng.below(6));
    Eigen::MatrixXd a(m, p);
    VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = std::exp(40.0 * rng.normal());
      for (int j = 0; j < p; ++j)
        a(i, j) = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
    }
    a(0, 0) = -0.0;
    const Dataset d(a, b);
    const NumericTable t = parse_numeric_csv(to_combined_csv(d));
    const Dataset back(t.values.rightCols(p), t.values.col(0));
    EXPECT_EQ(back, d);
  }
}

TEST(Csv, SplitAndCombinedFilesAgree) {
  TempDir dir;
  Rng rng(2);
  const Dataset d = oracle::random_dataset(rng, 7, 3, 1.0);
  write_combined_csv(dir / "all.csv", d);
  std::string design, response;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    response += format_double(d.responses(i)) + "\n";
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      design += format_double(d.design(i, j)) + (j + 1 < d.cols() ? "," : "\n");
  }
  write(dir / "a.csv", design);
  write(dir / "b.csv", "b\n" + response);
  EXPECT_EQ(read_combined_csv(dir / "all.csv"), d);
  EXPECT_EQ(read_split_csv(dir / "a.csv", dir / "b.csv"), d);
  EXPECT_THROW(read_combined_csv(dir / "missing.csv"), InputError);
}

TEST(Design, InterceptColumnIsUnpenalized) {
  Rng rng(3);
  const Dataset d = oracle::random_dataset(rng, 20, 3, 1.0);
  const PreparedDesign plain = prepare_design(d, {});
  EXPECT_EQ(plain.data, d);
  EXPECT_EQ(plain.penalty_factors.size(), 0);

  const PreparedDesign with = prepare_design(d, {true, false});
  ASSERT_EQ(with.data.cols(), 4);
  EXPECT_TRUE((with.data.design.col(3).array() == 1.0).all());
  EXPECT_EQ(with.penalty_factors, (VectorXd(4) << 1, 1, 1, 0).finished());
}

TEST(Design, StandardizedFitMapsBackToOriginalScale) {
  Rng rng(4);
  Dataset d = oracle::random_dataset(rng, 60, 3, 2.0);
  d.design.col(0) = d.design.col(0) * 25.0 + VectorXd::Constant(60, 3.0);
  d.design.col(2) *= 0.01;
  const PreparedDesign prepared = prepare_design(d, {true, true});
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(prepared.data.design.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(prepared.data.design.col(j).squaredNorm() / 60.0, 1.0, 1e-12);
  }
  const FitResult std_fit = solve(GammaGlmProblem(prepared.data, 2.0));
  const PreparedDesign raw = prepare_design(d, {true, false});
  const VectorXd mapped = prepared.to_original(std_fit.coefficients);
  // Same linear predictor, hence the same likelihood, on the raw columns.
  const VectorXd eta_std = prepared.data.design * std_fit.coefficients;
  const VectorXd eta_raw = raw.data.design * mapped;
  EXPECT_LT((eta_std - eta_raw).cwiseAbs().maxCoeff(), 1e-10);
  const FitResult raw_fit = solve(GammaGlmProblem(raw.data, 2.0));
  EXPECT_LE(nll(GammaGlmProblem(raw.data, 2.0), mapped),
            nll(GammaGlmProblem(raw.data, 2.0), raw_fit.coefficients) + 1e-9);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, kExitInputError);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInputError);
  EXPECT_EQ(run({"fit", "--bogus"}).code, kExitInputError);
  const CliResult missing = run({"fit"});
  EXPECT_EQ(missing.code, kExitInputError);
  EXPECT_NE(missing.err.find("--data"), std::string::npos);
  EXPECT_EQ(run({"fit", "--data", "/nonexistent/x.csv"}).code, kExitInputError);
  EXPECT_EQ(run({"cv", "--rule", "median", "--data", "x.csv"}).code, kExitInputError);
  EXPECT_EQ(run({"simulate", "--p", "3", "--zeros", "5", "--runs", "1"}).code, kExitInputError);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, FitSingleObservation) {
  TempDir dir;
  write(dir / "one.csv", "b,x1\n2.718281828459045,1\n");
  const CliResult r = run({"fit", "--data", (dir / "one.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_NEAR(j["coefficients"][0].get<double>(), 1.0, 1e-6);
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_TRUE(j.contains("line_search_activations"));
  EXPECT_TRUE(j.contains("objective"));
  EXPECT_TRUE(j.contains("iterations"));
}

TEST(Cli, MalformedCsvAndBadResponsesExitWithTwo) {
  TempDir dir;
  write(dir / "bad.csv", "b,x1\n1,2\n3\n");
  const CliResult r = run({"fit", "--data", (dir / "bad.csv").string()});
  EXPECT_EQ(r.code, kExitInputError);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  write(dir / "neg.csv", "1,2\n-1,3\n");
  EXPECT_EQ(run({"fit", "--data", (dir / "neg.csv").string()}).code, kExitInputError);
}

TEST(Cli, OverflowExitsWithThree) {
  TempDir dir;
  write(dir / "big.csv", "b,x1\n1e300,800\n1e-300,-800\n");
  const CliResult r = run({"fit", "--data", (dir / "big.csv").string()});
  EXPECT_EQ(r.code, kExitSolverError);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CvLambdaMaxGivesZeroFit) {
  TempDir dir;
  Rng rng(5);
  write_combined_csv(dir / "d.csv", oracle::random_dataset(rng, 40, 4, 1.0));
  const std::string data = (dir / "d.csv").string();
  const CliResult cv = run({"cv", "--data", data, "--n-lambda", "10", "--folds", "4", "--seed",
                            "3", "--rule", "1sd", "--out-dir", dir.path().string()});
  ASSERT_EQ(cv.code, kExitOk) << cv.err;
  const auto report = nlohmann::json::parse(slurp(dir / "cv_report.json"));
  EXPECT_GE(report["selected"]["1sd"]["lambda"].get<double>(),
            report["selected"]["min"]["lambda"].get<double>());
  EXPECT_EQ(report["best"]["rule"], "1sd");

  const std::string path_csv = slurp(dir / "path.csv");
  EXPECT_EQ(std::count(path_csv.begin(), path_csv.end(), '\n'), 11);

  const double top = report["lambda_max"].get<double>();
  std::ostringstream lam;
  lam << std::setprecision(17) << top;
  const CliResult fit = run({"fit", "--data", data, "--lambda", lam.str()});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  for (const auto& c : nlohmann::json::parse(fit.out)["coefficients"])
    EXPECT_EQ(c.get<double>(), 0.0);
}

TEST(Cli, CvFoldsAboveRowsExitsWithTwo) {
  TempDir dir;
  write(dir / "d.csv", "2,1\n3,0.5\n0.5,-1\n");
  EXPECT_EQ(run({"cv", "--data", (dir / "d.csv").string(), "--folds", "4", "--out-dir",
                 dir.path().string()})
                .code,
            kExitInputError);
}

TEST(Cli, CvOutputsAreWorkerInvariant) {
  TempDir dir;
  Rng rng(6);
  write_combined_csv(dir / "d.csv", oracle::random_dataset(rng, 50, 5, 1.0));
  std::string reference_json, reference_csv;
  for (const char* workers : {"1", "4", "8"}) {
    const fs::path out = dir / (std::string("w") + workers);
    const CliResult r = run({"cv", "--data", (dir / "d.csv").string(), "--n-lambda", "15",
                             "--folds", "5", "--seed", "11", "--workers", workers, "--out-dir",
                             out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    if (reference_json.empty()) {
      reference_json = slurp(out / "cv_report.json");
      reference_csv = slurp(out / "path.csv");
    } else {
      EXPECT_EQ(slurp(out / "cv_report.json"), reference_json) << "workers " << workers;
      EXPECT_EQ(slurp(out / "path.csv"), reference_csv) << "workers " << workers;
    }
  }
}

TEST(Cli, SimulateWritesTablesDeterministically) {
  TempDir dir;
  std::vector<std::string> args{"simulate", "--runs", "3", "--n", "30", "--p", "5",
                                "--zeros", "3", "--shape", "2", "--n-lambda", "8",
                                "--folds", "3", "--seed", "7", "--save-datasets"};
  auto with_out = [&](const std::string& workers, const fs::path& out) {
    auto a = args;
    a.insert(a.end(), {"--workers", workers, "--out-dir", out.string()});
    return run(a);
  };
  ASSERT_EQ(with_out("1", dir / "a").code, kExitOk);
  ASSERT_EQ(with_out("4", dir / "b").code, kExitOk);
  for (const char* f : {"table3.csv", "table4.csv", "histogram.csv", "report.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;

  const std::string t4 = slurp(dir / "a" / "table4.csv");
  EXPECT_NE(t4.find("glmGamma,0,"), std::string::npos) << t4;

  std::istringstream hist(slurp(dir / "a" / "histogram.csv"));
  std::string line;
  std::getline(hist, line);
  std::map<std::string, int> totals;
  while (std::getline(hist, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    totals[line.substr(0, c1)] += std::stoi(line.substr(c2 + 1));
  }
  EXPECT_EQ(totals.size(), 6u);
  for (const auto& [name, total] : totals)
    EXPECT_EQ(total, 3) << name;

  const Dataset saved = read_combined_csv(dir / "a" / "datasets" / "run_00001.csv");
  EXPECT_EQ(saved.rows(), 30);
  EXPECT_EQ(saved.cols(), 5);
}
