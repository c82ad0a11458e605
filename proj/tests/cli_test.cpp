// Runs the cdtkit binary end to end.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cdtkit/classify.hpp"
#include "cdtkit/features.hpp"
#include "doctest.h"

using namespace cdtkit;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(CDTKIT_SOURCE_DIR) / "tests" / "data";

fs::path workdir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "cdtkit_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code = -1;
  std::string err;
};

Run run(const std::string& args, const std::string& env = "") {
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" + CDTKIT_CLI +
                          "' " + args + " 2> '" + err.string() + "' > /dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kGenerate = R"({
  "schema": "cdtkit.generate/1",
  "preset": "generative",
  "domain": [0, 3],
  "bins": 48,
  "cdt_points": 64,
  "mother_p": [{"mean": 0.55, "sd": 0.15}, {"mean": 1.05, "sd": 0.15}],
  "mother_q": [{"mean": 0.8, "sd": 0.15}],
  "family": {"kind": "affine"},
  "samples_per_class": 10
})";

}  // namespace

TEST_CASE("transform reproduces the golden normal fixture") {
  const Run r = run("-q transform '" + (kData / "normal_density.csv").string() +
                    "' golden.csv --grid 1024 --epsilon-floor 0");
  REQUIRE(r.code == 0);
  const LabeledDataset got = load_dataset_csv(workdir() / "golden.csv");
  const LabeledDataset want = load_dataset_csv(kData / "normal_cdt_1024.csv");
  REQUIRE(got.features.cols() == 1024);
  CHECK((got.features - want.features).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fs::exists(workdir() / "golden.csv.json"));
}

TEST_CASE("uniform rows map to zero and back") {
  write(workdir() / "flat.csv", "label,a,b,c,d\n0,1,1,1,1\n1,2,2,2,2\n");
  REQUIRE(run("-q transform flat.csv flat_cdt.csv --grid 16").code == 0);
  const LabeledDataset t = load_dataset_csv(workdir() / "flat_cdt.csv");
  CHECK(t.features.cwiseAbs().maxCoeff() < 1e-12);

  write(workdir() / "zero_cdt.csv", "label,a,b,c,d,e\n0,0,0,0,0,0\n");
  REQUIRE(run("-q inverse zero_cdt.csv zero_back.csv --grid 8").code == 0);
  const LabeledDataset d = load_dataset_csv(workdir() / "zero_back.csv");
  REQUIRE(d.features.cols() == 8);
  CHECK((d.features.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("transform then inverse recovers the input through the sidecar") {
  write(workdir() / "bump.csv", "label,a,b,c,d,e,f\n0,1,2,4,4,2,1\n1,3,1,1,1,1,3\n");
  REQUIRE(run("-q transform bump.csv bump_cdt.csv --domain 2,5 --grid 512 --epsilon-floor 0")
              .code == 0);
  REQUIRE(run("-q inverse bump_cdt.csv bump_back.csv").code == 0);
  const LabeledDataset in = load_dataset_csv(workdir() / "bump.csv");
  const LabeledDataset back = load_dataset_csv(workdir() / "bump_back.csv");
  REQUIRE(back.features.cols() == 6);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const Eigen::RowVectorXd want = in.features.row(i) / (in.features.row(i).sum() * 0.5);
    CHECK((back.features.row(i) - want).cwiseAbs().maxCoeff() < 1e-2);
  }
}

TEST_CASE("exit codes") {
  SUBCASE("missing input names the path") {
    const Run r = run("transform does_not_exist.csv out.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("does_not_exist.csv") != std::string::npos);
  }
  SUBCASE("unknown flag") { CHECK(run("transform --bogus a b").code == 2); }
  SUBCASE("no subcommand") { CHECK(run("").code == 2); }
  SUBCASE("malformed csv") {
    write(workdir() / "bad_cell.csv", "label,a,b\n0,1,oops\n");
    const Run r = run("transform bad_cell.csv out.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find(":2") != std::string::npos);
  }
  SUBCASE("non-monotone transform row") {
    write(workdir() / "nonmono.csv", "label,a,b,c\n0,0,0,0\n1,0.5,-0.2,0.3\n");
    const Run r = run("inverse nonmono.csv out.csv");
    CHECK(r.code == 3);
    CHECK(r.err.find("row 2") != std::string::npos);
  }
  SUBCASE("all-zero density without a floor") {
    write(workdir() / "zeros.csv", "label,a,b,c\n0,1,1,1\n1,0,0,0\n");
    const Run r = run("transform zeros.csv out.csv --epsilon-floor 0");
    CHECK(r.code == 3);
    CHECK(r.err.find("row 2") != std::string::npos);
  }
  SUBCASE("generate without a seed") {
    write(workdir() / "gen.json", kGenerate);
    CHECK(run("generate gen.json").code == 2);
  }
  SUBCASE("wrong schema") {
    write(workdir() / "old.json", R"({"schema": "cdtkit.generate/0", "seed": 1})");
    const Run r = run("generate old.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("schema") != std::string::npos);
  }
  SUBCASE("bad thread cap") {
    write(workdir() / "gen.json", kGenerate);
    CHECK(run("--seed 1 generate gen.json", "CDTKIT_THREADS=zero").code == 2);
  }
  SUBCASE("single-class projection") {
    write(workdir() / "one.csv", "label,a,b\n0,1,2\n0,2,3\n0,3,1\n");
    CHECK(run("--seed 1 project one.csv").code == 2);
  }
}

TEST_CASE("generate is deterministic in the seed") {
  write(workdir() / "gen.json", kGenerate);
  REQUIRE(run("-q --seed 7 -o g1 generate gen.json --prefix s").code == 0);
  REQUIRE(run("-q --seed 7 -o g2 generate gen.json --prefix s", "CDTKIT_THREADS=1").code == 0);
  REQUIRE(run("-q --seed 8 -o g3 generate gen.json --prefix s").code == 0);
  for (const char* f : {"s_raw.csv", "s_cdt.csv", "s_provenance.json"}) {
    CHECK(slurp(workdir() / "g1" / f) == slurp(workdir() / "g2" / f));
  }
  CHECK(slurp(workdir() / "g1" / "s_raw.csv") != slurp(workdir() / "g3" / "s_raw.csv"));
  const std::string prov = slurp(workdir() / "g1" / "s_provenance.json");
  CHECK(prov.find("\"seed\": 7") != std::string::npos);
  CHECK(prov.find("\"warps\"") != std::string::npos);
  const LabeledDataset raw = load_dataset_csv(workdir() / "g1" / "s_raw.csv");
  CHECK(raw.size() == 20);
  CHECK(raw.dimension() == 48);
}

TEST_CASE("evaluate with leave-one-out runs one fold per sample") {
  write(workdir() / "gen.json", kGenerate);
  REQUIRE(run("-q --seed 3 -o loo generate gen.json").code == 0);
  write(workdir() / "loo" / "eval.json", R"({
    "schema": "cdtkit.evaluate/1",
    "spaces": {"cdt": "generative_cdt.csv"},
    "classifiers": ["lda", "svm"],
    "grids": {"svm": [0.1, 10]},
    "folds": 5
  })");
  REQUIRE(run("-q --seed 3 -o loo/out evaluate loo/eval.json --folds loo").code == 0);
  const std::string summary = slurp(workdir() / "loo" / "out" / "summary.csv");
  CHECK(summary.find("cdt,lda,20,") != std::string::npos);
  CHECK(summary.find("cdt,svm,20,") != std::string::npos);
  const std::string report = slurp(workdir() / "loo" / "out" / "report_cdt_lda.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 21);
}

TEST_CASE("project writes a separable embedding and an svg") {
  write(workdir() / "gen.json", kGenerate);
  REQUIRE(run("-q --seed 5 -o proj generate gen.json").code == 0);
  REQUIRE(run("-q --seed 5 -o proj project proj/generative_cdt.csv --train-frac 1").code == 0);
  const std::string csv = slurp(workdir() / "proj" / "projection.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "row,label,split,x,y");
  std::vector<Eigen::Vector2d> a, b;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string row, label, split, x, y;
    std::getline(cells, row, ',');
    std::getline(cells, label, ',');
    std::getline(cells, split, ',');
    std::getline(cells, x, ',');
    std::getline(cells, y, ',');
    (label == "0" ? a : b).emplace_back(std::stod(x), std::stod(y));
  }
  REQUIRE(a.size() == 10);
  REQUIRE(b.size() == 10);
  Eigen::MatrixXd pa(a.size(), 2), pb(b.size(), 2);
  for (std::size_t i = 0; i < a.size(); ++i) pa.row(static_cast<Eigen::Index>(i)) = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) pb.row(static_cast<Eigen::Index>(i)) = b[i];
  CHECK(check_linear_separability(pa, pb).separable);

  const std::string svg = slurp(workdir() / "proj" / "projection.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("class=\"label-0\"") != std::string::npos);
  CHECK(svg.find("class=\"label-1\"") != std::string::npos);
}

TEST_CASE("extract saves and reuses the histogram range") {
  write(workdir() / "acc.csv",
        "label,x,y,z\n"
        "0,1,0,0,0,1,0,0,0,1\n"
        "0,2,0,0\n"
        "1,0,3,0,0,0,4\n");
  REQUIRE(run("-q extract acc.csv energy.csv --features energy --axes 3 --pad").code == 0);
  const LabeledDataset e = load_dataset_csv(workdir() / "energy.csv");
  REQUIRE(e.dimension() == 3);
  CHECK(e.features(1, 0) == doctest::Approx(4.0));
  CHECK(e.features(1, 2) == 0.0);
  CHECK(e.features(2, 1) == doctest::Approx(16.0));

  REQUIRE(run("-q extract acc.csv hist.csv --features energy-histogram --axes 3 --bins 4").code == 0);
  const std::string range = slurp(workdir() / "hist.csv.range.json");
  CHECK(range.find("cdtkit.range/1") != std::string::npos);
  REQUIRE(run("-q extract acc.csv hist2.csv --features energy-histogram --axes 3 "
              "--range-file hist.csv.range.json")
              .code == 0);
  CHECK(slurp(workdir() / "hist.csv") == slurp(workdir() / "hist2.csv"));
}

TEST_CASE("histogram pipeline on concatenated x and y blocks") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> narrow(0.0, 0.6);
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  std::string xs = "label,values\n", ys = xs;
  for (int i = 0; i < 24; ++i) {
    const int label = i % 2;
    for (std::string* out : {&xs, &ys}) {
      *out += std::to_string(label);
      for (int k = 0; k < 200 + 10 * i; ++k) {
        *out += "," + std::to_string(label == 0 ? narrow(rng) : wide(rng));
      }
      *out += "\n";
    }
  }
  write(workdir() / "xs.csv", xs);
  write(workdir() / "ys.csv", ys);
  for (const char* block : {"xs", "ys"}) {
    const std::string b = block;
    REQUIRE(run("-q -o pipe extract " + b + ".csv " + b + "_hist.csv --bins 32 --range -4,4").code == 0);
    REQUIRE(run("-q -o pipe transform pipe/" + b + "_hist.csv " + b + "_cdt.csv --domain -4,4 --grid 64")
                .code == 0);
  }
  REQUIRE(run("-q -o pipe extract xs.csv wide_hist.csv --bins 1024 --range -4,4").code == 0);
  CHECK(load_dataset_csv(workdir() / "pipe" / "wide_hist.csv").dimension() == 1024);
  REQUIRE(run("-q -o pipe transform pipe/wide_hist.csv wide_cdt.csv --domain -4,4").code == 0);

  write(workdir() / "pipe" / "eval.json", R"({
    "schema": "cdtkit.evaluate/1",
    "spaces": {"xy": ["xs_cdt.csv", "ys_cdt.csv"], "wide": "wide_cdt.csv"},
    "classifiers": ["lda", "plda"],
    "folds": 3
  })");
  REQUIRE(run("-q --seed 2 -o pipe/out evaluate pipe/eval.json").code == 0);
  const std::string summary = slurp(workdir() / "pipe" / "out" / "summary.csv");
  CHECK(summary.find("xy,lda,3,") != std::string::npos);
  CHECK(summary.find("wide,plda,3,") != std::string::npos);
  const std::string report = slurp(workdir() / "pipe" / "out" / "report_xy_lda.txt");
  CHECK(report.find("3 folds") != std::string::npos);

  write(workdir() / "pipe" / "mismatch.json", R"({
    "schema": "cdtkit.evaluate/1",
    "spaces": {"bad": ["xs_cdt.csv", "eval.json"]}
  })");
  CHECK(run("--seed 2 -o pipe/out evaluate pipe/mismatch.json").code == 2);
}
