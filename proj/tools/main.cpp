// cdtkit command-line front end.

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "CLI11.hpp"
#include "app.hpp"
#include "cdtkit/cdt.hpp"
#include "cdtkit/classify.hpp"
#include "cdtkit/datagen.hpp"
#include "cdtkit/error.hpp"
#include "cdtkit/features.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cdtkit::cli {
namespace {

constexpr const char* kVersion = "0.1.0";

using Interval = std::pair<double, double>;

Interval interval(const std::vector<double>& v, const char* what) {
  if (v.size() != 2 || !(v[1] > v[0]) || !std::isfinite(v[0]) || !std::isfinite(v[1])) {
    throw UsageError(std::string(what) + " must be two increasing finite numbers 'lo,hi'");
  }
  return {v[0], v[1]};
}

Interval interval(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw UsageError(std::string(what) + " must be a two-element numeric array");
  }
  return interval(std::vector<double>{j[0].get<double>(), j[1].get<double>()}, what);
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw UsageError("input file not found: " + p.string());
}

// Library errors about the shape or content of the input are usage errors;
// everything else is numeric.
bool is_input_error(Errc code) {
  switch (code) {
    case Errc::kParseError:
    case Errc::kLabelMissing:
    case Errc::kEmptyInput:
    case Errc::kInvalidArgument:
    case Errc::kDimensionMismatch:
    case Errc::kTooFewSamples:
      return true;
    default:
      return false;
  }
}

// Input errors pass through; numeric ones are tagged with the 1-based row.
[[noreturn]] void rethrow_for_row(std::size_t row, const Error& e) {
  if (is_input_error(e.code())) throw;
  throw RowError("row " + std::to_string(row + 1) + ": " + e.what());
}

DiscreteDensity row_density(const LabeledDataset& data, Eigen::Index row, Interval domain,
                            double floor) {
  const auto n = static_cast<std::size_t>(data.features.cols());
  const double width = (domain.second - domain.first) / static_cast<double>(n);
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = data.features(row, static_cast<Eigen::Index>(k));
  return DiscreteDensity::from_samples(values, domain.first + 0.5 * width, width, floor);
}

json interval_json(Interval i) { return json::array({i.first, i.second}); }

// ---------------------------------------------------------------- transform

struct TransformArgs {
  std::string in, out;
  std::size_t grid = 256;
  std::vector<double> domain{0.0, 1.0};
  std::string reference = "uniform";
  std::vector<double> reference_domain{0.0, 1.0};
  double epsilon_floor = kDefaultEpsilonFloor;
};

int run_transform(const Globals& g, const TransformArgs& a) {
  require_file(a.in);
  const Interval domain = interval(a.domain, "--domain");
  const LabeledDataset data = load_dataset_csv(a.in);
  if (a.grid < 2) throw UsageError("--grid must be at least 2");

  json reference_meta;
  ReferenceDensity reference = ReferenceDensity::uniform();
  if (a.reference == "uniform") {
    reference_meta = {{"kind", "uniform"}};
  } else {
    require_file(a.reference);
    const Interval rd = interval(a.reference_domain, "--reference-domain");
    const LabeledDataset ref = load_dataset_csv(a.reference);
    if (ref.features.rows() != 1) throw UsageError("reference file must hold exactly one row");
    reference = ReferenceDensity(row_density(ref, 0, rd, 0.0));
    std::vector<double> values(reference.density().values().begin(),
                               reference.density().values().end());
    reference_meta = {{"kind", "file"}, {"domain", interval_json(rd)}, {"values", values}};
  }
  const GridPtr grid = make_grid(reference, a.grid);

  const auto n = static_cast<std::size_t>(data.features.rows());
  std::vector<std::optional<CdtSignal>> out(n);
  parallel_for(n, g.threads, [&](std::size_t i) {
    try {
      out[i] = forward(row_density(data, static_cast<Eigen::Index>(i), domain, a.epsilon_floor), grid);
    } catch (const Error& e) {
      rethrow_for_row(i, e);
    }
  });

  LabeledDataset result;
  result.labels = data.labels;
  result.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a.grid));
  json support = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < a.grid; ++k) {
      result.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = out[i]->values()[k];
    }
    const auto& s = out[i]->support();
    support.push_back(s ? json::array({s->first, s->second}) : json(nullptr));
  }
  const fs::path target = g.output(a.out);
  write_file_atomic(target, to_csv(result));
  write_json(fs::path(target.string() + ".json"),
             {{"schema", "cdtkit.transform/1"},
              {"grid_points", a.grid},
              {"reference", reference_meta},
              {"input", {{"domain", interval_json(domain)},
                         {"bins", data.features.cols()},
                         {"epsilon_floor", a.epsilon_floor}}},
              {"support", support}});
  g.note("transformed " + std::to_string(n) + " rows -> " + target.string());
  return kExitOk;
}

// ------------------------------------------------------------------ inverse

struct InverseArgs {
  std::string in, out, meta;
  std::size_t grid = 0;
  std::vector<double> domain;
};

int run_inverse(const Globals& g, const InverseArgs& a) {
  require_file(a.in);
  const LabeledDataset data = load_dataset_csv(a.in);
  fs::path meta_path = a.meta.empty() ? fs::path(a.in + ".json") : fs::path(a.meta);
  if (!a.meta.empty()) require_file(meta_path);
  std::optional<json> meta;
  if (fs::is_regular_file(meta_path)) {
    meta = read_json(meta_path);
    require_schema(*meta, "cdtkit.transform/1");
  }

  ReferenceDensity reference = ReferenceDensity::uniform();
  if (meta && meta->at("reference").at("kind") == "file") {
    const auto& r = meta->at("reference");
    const Interval rd = interval(r.at("domain"), "reference domain");
    const auto values = r.at("values").get<std::vector<double>>();
    const double width = (rd.second - rd.first) / static_cast<double>(values.size());
    reference = ReferenceDensity(
        DiscreteDensity::from_samples(values, rd.first + 0.5 * width, width, 0.0));
  }
  const auto m = static_cast<std::size_t>(data.features.cols());
  if (meta && meta->at("grid_points").get<std::size_t>() != m) {
    throw UsageError("row length " + std::to_string(m) + " differs from the sidecar's grid");
  }
  const GridPtr grid = make_grid(reference, m);

  std::optional<Interval> domain;
  if (!a.domain.empty()) {
    domain = interval(a.domain, "--domain");
  } else if (meta) {
    domain = interval(meta->at("input").at("domain"), "sidecar domain");
  }
  std::size_t bins = a.grid;
  if (bins == 0) bins = meta ? meta->at("input").at("bins").get<std::size_t>() : m;
  if (bins < 2) throw UsageError("--grid must be at least 2");

  const auto n = static_cast<std::size_t>(data.features.rows());
  std::vector<std::optional<DiscreteDensity>> out(n);
  parallel_for(n, g.threads, [&](std::size_t i) {
    try {
      std::vector<double> values(m);
      for (std::size_t k = 0; k < m; ++k) {
        values[k] = data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
      std::optional<Interval> support;
      if (meta && meta->contains("support")) {
        const auto& s = meta->at("support");
        if (s.size() != n) throw Error(Errc::kDimensionMismatch, "sidecar support count differs");
        if (!s[i].is_null()) support = Interval{s[i][0].get<double>(), s[i][1].get<double>()};
      }
      const CdtSignal t(values, grid, support);
      t.check_monotone();
      out[i] = domain ? inverse(t, OutputGrid::spanning(domain->first, domain->second, bins))
                      : inverse(t, bins);
    } catch (const Error& e) {
      rethrow_for_row(i, e);
    }
  });

  LabeledDataset result;
  result.labels = data.labels;
  result.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(bins));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < bins; ++k) {
      result.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = out[i]->values()[k];
    }
  }
  const fs::path target = g.output(a.out);
  write_file_atomic(target, to_csv(result));
  json sidecar = {{"schema", "cdtkit.inverse/1"}, {"bins", bins}};
  if (domain) sidecar["domain"] = interval_json(*domain);
  write_json(fs::path(target.string() + ".json"), sidecar);
  g.note("inverted " + std::to_string(n) + " rows -> " + target.string());
  return kExitOk;
}

// ----------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config;
  std::string prefix;
};

// Normal mixture from [{"mean", "sd", "weight"}], truncated to the domain.
DiscreteDensity mixture_density(const json& spec, Interval domain, std::size_t bins, double floor,
                                const char* what) {
  if (!spec.is_array() || spec.empty()) {
    throw UsageError(std::string(what) + " must be a nonempty array of mixture components");
  }
  std::vector<std::tuple<double, double, double>> parts;
  double total = 0.0;
  for (const auto& c : spec) {
    const double mean = c.at("mean").get<double>();
    const double sd = c.at("sd").get<double>();
    const double weight = c.value("weight", 1.0);
    if (!(sd > 0.0) || !(weight > 0.0)) {
      throw UsageError(std::string(what) + ": sd and weight must be positive");
    }
    parts.emplace_back(mean, sd, weight);
    total += weight;
  }
  auto raw = [parts, total](double x) {
    double s = 0.0;
    for (const auto& [mean, sd, weight] : parts) {
      s += weight * boost::math::cdf(boost::math::normal_distribution<double>(mean, sd), x);
    }
    return s / total;
  };
  const double lo = raw(domain.first);
  const double hi = raw(domain.second);
  if (!(hi - lo > 0.5)) throw UsageError(std::string(what) + " has most of its mass off the domain");
  return DiscreteDensity::from_cdf([=](double x) { return (raw(x) - lo) / (hi - lo); },
                                   domain.first, domain.second, bins, floor);
}

ConfoundFamily family_from(const json& j, Interval domain, std::uint64_t seed) {
  const FamilyKind kind = parse_family_kind(j.value("kind", std::string("affine")));
  const Interval shifts = j.contains("shift_range") ? interval(j["shift_range"], "shift_range")
                                                    : Interval{0.0, 0.5};
  const Interval scales = j.contains("scale_range") ? interval(j["scale_range"], "scale_range")
                                                    : Interval{0.6, 1.67};
  switch (kind) {
    case FamilyKind::kTranslation: return ConfoundFamily::translation(shifts, seed);
    case FamilyKind::kScaling: return ConfoundFamily::scaling(scales, seed);
    case FamilyKind::kAffine: return ConfoundFamily::affine(shifts, scales, seed);
    case FamilyKind::kCustomMonotone: {
      // Power maps x^k on a nonnegative domain.
      const auto powers = j.at("powers").get<std::vector<double>>();
      std::vector<Warp> members;
      for (double k : powers) {
        if (!(k > 0.0)) throw UsageError("powers must be positive");
        members.push_back(Warp{[k](double x) { return std::pow(x, k); },
                               [k](double y) { return std::pow(y, 1.0 / k); }});
      }
      if (domain.first < 0.0) throw UsageError("power families need a nonnegative domain");
      return ConfoundFamily::custom(std::move(members), domain, seed);
    }
  }
  throw UsageError("unknown family");
}

json warps_json(const std::vector<Warp>& warps) {
  json out = json::array();
  for (const auto& w : warps) {
    if (w.member >= 0) {
      out.push_back({{"member", w.member}});
    } else {
      out.push_back({{"shift", w.shift}, {"scale", w.scale}});
    }
  }
  return out;
}

int run_generate(const Globals& g, const GenerateArgs& a) {
  require_file(a.config);
  const json config = read_json(a.config);
  require_schema(config, "cdtkit.generate/1");
  const std::uint64_t seed = g.require_seed(&config);
  const std::string preset = config.value("preset", std::string("texture"));
  const std::string prefix = a.prefix.empty() ? config.value("prefix", preset) : a.prefix;

  LabeledDataset raw, cdt;
  json provenance = {{"schema", "cdtkit.provenance/1"}, {"tool_version", kVersion},
                     {"preset", preset}, {"seed", seed}};
  if (preset == "texture") {
    const TextureSimulation sim = texture_simulation(seed);
    raw = sim.raw;
    cdt = sim.cdt;
    provenance["family"] = {{"kind", "affine"},
                            {"shift_range", json::array({0.0, 0.5})},
                            {"scale_range", json::array({0.6, 1.67})},
                            {"grid", "8 shifts x 8 scales shared by both classes"}};
    provenance["samples_per_class"] = 64;
    provenance["domain"] = json::array({kTextureLower, kTextureUpper});
    provenance["bins"] = kTextureBins;
    provenance["cdt_points"] = kTextureCdtPoints;
    provenance["reference"] = "uniform";
    provenance["warps"] = warps_json(sim.warps);
  } else if (preset == "generative") {
    const Interval domain = interval(config.at("domain"), "domain");
    const auto bins = config.at("bins").get<std::size_t>();
    const auto points = config.value("cdt_points", std::size_t{256});
    const double floor = config.value("epsilon_floor", kDefaultEpsilonFloor);
    const auto n = config.at("samples_per_class").get<std::size_t>();
    const json family_spec = config.value("family", json::object());
    GenerativeSpec spec{mixture_density(config.at("mother_p"), domain, bins, floor, "mother_p"),
                        mixture_density(config.at("mother_q"), domain, bins, floor, "mother_q"),
                        family_from(family_spec, domain, seed), n, std::nullopt};
    spec.epsilon_floor = floor;
    if (const double sd = config.value("noise_sd", 0.0); sd > 0.0) {
      const double r = spec.mother_p.spacing();
      const auto half = static_cast<std::size_t>(std::ceil(4.0 * sd / r));
      const double reach = (static_cast<double>(half) + 0.5) * r;
      spec.noise = DiscreteDensity::from_cdf(
          [=](double x) {
            boost::math::normal_distribution<double> nd(0.0, sd);
            const double lo = boost::math::cdf(nd, -reach);
            return (boost::math::cdf(nd, x) - lo) / (1.0 - 2.0 * lo);
          },
          -reach, reach, 2 * half + 1, 0.0);
    }
    const auto p = sample_class(spec, 0);
    const auto q = sample_class(spec, 1);
    raw = density_rows(p.densities, q.densities);
    cdt = cdt_rows(p.densities, q.densities, make_grid(ReferenceDensity::uniform(), points));
    provenance["family"] = {{"kind", to_string(spec.family.kind)},
                            {"shift_range", interval_json(spec.family.shift_range)},
                            {"scale_range", interval_json(spec.family.scale_range)}};
    provenance["samples_per_class"] = n;
    provenance["domain"] = interval_json(domain);
    provenance["bins"] = bins;
    provenance["cdt_points"] = points;
    provenance["epsilon_floor"] = floor;
    provenance["noise_sd"] = config.value("noise_sd", 0.0);
    provenance["reference"] = "uniform";
    std::vector<Warp> warps = p.warps;
    warps.insert(warps.end(), q.warps.begin(), q.warps.end());
    provenance["warps"] = warps_json(warps);
  } else {
    throw UsageError("unknown preset '" + preset + "' (expected texture or generative)");
  }

  const fs::path raw_path = g.output(prefix + "_raw.csv");
  const fs::path cdt_path = g.output(prefix + "_cdt.csv");
  provenance["outputs"] = {{"raw", raw_path.filename().string()},
                           {"cdt", cdt_path.filename().string()}};
  write_file_atomic(raw_path, to_csv(raw));
  write_file_atomic(cdt_path, to_csv(cdt));
  write_json(g.output(prefix + "_provenance.json"), provenance);
  g.note("wrote " + raw_path.string() + " and " + cdt_path.string());
  return kExitOk;
}

// ------------------------------------------------------------------ extract

struct ExtractArgs {
  std::string in, out, features = "histogram", range_file;
  int axes = 1;
  std::size_t bins = 64;
  std::vector<double> range;
  bool pad = false;
  double epsilon_floor = kDefaultEpsilonFloor;
};

int run_extract(const Globals& g, const ExtractArgs& a) {
  require_file(a.in);
  RawSignalSet set = load_raw_csv(a.in, a.axes);
  const bool want_energy = a.features == "energy" || a.features == "energy-histogram";
  const bool want_histogram = a.features == "histogram" || a.features == "energy-histogram";
  if (!want_energy && !want_histogram) {
    throw UsageError("--features must be energy, histogram or energy-histogram");
  }
  if (want_energy) set = energy(set);
  if (set.axes != 1) throw UsageError("histograms need single-axis signals; use --features energy-histogram");
  if (a.pad) set = zero_pad(set);

  const fs::path target = g.output(a.out);
  if (!want_histogram) {
    write_file_atomic(target, to_csv(set));
    g.note("extracted " + std::to_string(set.size()) + " signals -> " + target.string());
    return kExitOk;
  }

  HistogramRange range;
  std::size_t bins = a.bins;
  if (!a.range_file.empty()) {
    require_file(a.range_file);
    const json r = read_json(a.range_file);
    require_schema(r, "cdtkit.range/1");
    range = {r.at("lower").get<double>(), r.at("upper").get<double>()};
    bins = r.at("bins").get<std::size_t>();
  } else if (!a.range.empty()) {
    const Interval i = interval(a.range, "--range");
    range = {i.first, i.second};
  } else {
    range = HistogramRange::spanning(set);
  }
  const LabeledDataset rows = histograms(set, bins, range, a.epsilon_floor);
  write_file_atomic(target, to_csv(rows));
  write_json(fs::path(target.string() + ".range.json"),
             {{"schema", "cdtkit.range/1"},
              {"lower", range.lower},
              {"upper", range.upper},
              {"bins", bins},
              {"epsilon_floor", a.epsilon_floor}});
  g.note("extracted " + std::to_string(rows.size()) + " histograms -> " + target.string());
  return kExitOk;
}

// ----------------------------------------------------------------- evaluate

// Column-wise concatenation of blocks that share rows and labels.
LabeledDataset concatenate(const std::vector<LabeledDataset>& blocks, const std::string& name) {
  if (blocks.empty()) throw UsageError("space '" + name + "' lists no files");
  LabeledDataset out;
  out.labels = blocks.front().labels;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    if (b.labels != out.labels) {
      throw UsageError("space '" + name + "': blocks disagree on rows or labels");
    }
    cols += b.dimension();
  }
  out.features.resize(blocks.front().size(), cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.features.middleCols(at, b.dimension()) = b.features;
    at += b.dimension();
  }
  return out;
}

struct EvaluateArgs {
  std::string config;
  std::string folds;
};

int parse_folds(const json& value, std::size_t rows) {
  if (value.is_string()) {
    if (value == "loo") return static_cast<int>(rows);
    throw UsageError("folds must be an integer or \"loo\"");
  }
  if (!value.is_number_integer() || value.get<int>() < 2) {
    throw UsageError("folds must be an integer >= 2 or \"loo\"");
  }
  return value.get<int>();
}

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  require_file(a.config);
  const json config = read_json(a.config);
  require_schema(config, "cdtkit.evaluate/1");
  const std::uint64_t seed = g.require_seed(&config);
  const fs::path base = fs::path(a.config).parent_path();

  std::vector<std::pair<std::string, LabeledDataset>> spaces;
  if (config.value("preset", std::string()) == "texture") {
    const TextureSimulation sim = texture_simulation(seed);
    spaces = {{"raw", sim.raw}, {"cdt", sim.cdt}};
  } else if (config.contains("spaces") && config["spaces"].is_object()) {
    for (const auto& [name, paths] : config["spaces"].items()) {
      std::vector<LabeledDataset> blocks;
      for (const auto& path : paths.is_array() ? paths : json::array({paths})) {
        const fs::path p = base / path.get<std::string>();
        require_file(p);
        blocks.push_back(load_dataset_csv(p));
      }
      spaces.emplace_back(name, concatenate(blocks, name));
    }
  } else {
    throw UsageError("config needs \"preset\": \"texture\" or a \"spaces\" object of CSV paths");
  }
  if (spaces.empty()) throw UsageError("no feature spaces to evaluate");

  std::vector<Method> methods;
  for (const auto& m : config.value("classifiers", json::array({"lda", "plda", "svm"}))) {
    methods.push_back(parse_method(m.get<std::string>()));
  }
  const json grids = config.value("grids", json::object());

  std::string summary = "space,method,folds,mean_train_error,mean_test_error,kappa\n";
  json summary_json = json::array();
  for (const auto& [name, data] : spaces) {
    data.validate();
    const json fold_spec = !a.folds.empty()
                               ? (a.folds == "loo" ? json("loo") : json(std::stoi(a.folds)))
                               : config.value("folds", json(5));
    const int folds = parse_folds(fold_spec, static_cast<std::size_t>(data.size()));
    for (Method method : methods) {
      CvOptions options;
      options.folds = folds;
      options.seed = seed;
      options.threads = static_cast<int>(g.threads);
      if (grids.contains(method_name(method))) {
        options.grid = grids[method_name(method)].get<std::vector<double>>();
      }
      const CvReport report = cross_validate(data, method, options);
      const std::string stem = "report_" + name + "_" + method_name(method);
      write_file_atomic(g.output(stem + ".csv"), report.to_csv());
      write_file_atomic(g.output(stem + ".txt"), report.to_table());
      summary += name + "," + method_name(method) + "," + std::to_string(report.folds()) + "," +
                 format_double(report.mean_train_error) + "," +
                 format_double(report.mean_test_error) + "," + format_double(report.kappa) + "\n";
      summary_json.push_back({{"space", name},
                              {"method", method_name(method)},
                              {"folds", report.folds()},
                              {"mean_train_error", report.mean_train_error},
                              {"mean_test_error", report.mean_test_error},
                              {"kappa", report.kappa}});
      g.note(name + " / " + method_name(method) + ": mean test error " +
             format_double(report.mean_test_error));
    }
  }
  write_file_atomic(g.output("summary.csv"), summary);
  write_json(g.output("summary.json"), {{"schema", "cdtkit.summary/1"},
                                        {"seed", seed},
                                        {"results", summary_json}});
  if (!g.quiet) std::cout << summary;
  return kExitOk;
}

// ------------------------------------------------------------------ project

struct ProjectArgs {
  std::string data, svg = "projection.svg", csv = "projection.csv";
  double train_frac = 0.5;
  double alpha = kDefaultProjectionAlpha;
};

int run_project(const Globals& g, const ProjectArgs& a) {
  require_file(a.data);
  const std::uint64_t seed = g.require_seed();
  if (!(a.train_frac > 0.0 && a.train_frac <= 1.0)) throw UsageError("--train-frac must be in (0, 1]");
  const LabeledDataset data = load_dataset_csv(a.data);
  try {
    data.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  // Stratified split: each class shuffled with the seed, the first share trains.
  std::vector<bool> is_train(data.labels.size(), false);
  std::mt19937_64 rng(derive_seed(seed, 0x9e3779b9u));
  for (int c : data.classes()) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      if (data.labels[i] == c) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    auto take = static_cast<std::size_t>(std::ceil(a.train_frac * static_cast<double>(rows.size())));
    take = std::clamp<std::size_t>(take, 1, rows.size());
    for (std::size_t k = 0; k < take; ++k) is_train[rows[k]] = true;
  }
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < is_train.size(); ++i) {
    if (is_train[i]) train.push_back(i);
  }

  const Eigen::MatrixXd xy = project_2d(data, train, a.alpha);
  std::string csv = "row,label,split,x,y\n";
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    csv += std::to_string(r + 1) + "," + std::to_string(data.labels[r]) + "," +
           (is_train[r] ? "train" : "test") + "," + format_double(xy(i, 0)) + "," +
           format_double(xy(i, 1)) + "\n";
  }
  ScatterStyle style;
  style.title = "PLDA embedding of " + fs::path(a.data).filename().string();
  write_file_atomic(g.output(a.csv), csv);
  write_file_atomic(g.output(a.svg), scatter_svg(xy, data.labels, is_train, style));
  g.note("projected " + std::to_string(xy.rows()) + " rows -> " + g.output(a.svg).string());
  return kExitOk;
}

}  // namespace
}  // namespace cdtkit::cli

int main(int argc, char** argv) {
  using namespace cdtkit::cli;
  CLI::App app{"Cumulative distribution transform toolkit", "cdtkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Globals g;
  std::uint64_t seed = 0;
  std::string output_dir;
  app.add_option("--seed", seed, "Random seed")->group("Global");
  app.add_flag("--quiet,-q", g.quiet, "Suppress progress messages")->group("Global");
  app.add_option("--output-dir,-o", output_dir, "Directory for outputs")->group("Global");

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Forward CDT of every density row");
  transform->add_option("input", ta.in, "Density CSV (label, v1, ..., vN)")->required();
  transform->add_option("output", ta.out, "CDT CSV")->required();
  transform->add_option("--grid", ta.grid, "Transform points M")->capture_default_str();
  transform->add_option("--domain", ta.domain, "Domain lo,hi of the density rows")
      ->delimiter(',')->expected(2);
  transform->add_option("--reference", ta.reference, "uniform, or a one-row density CSV")
      ->capture_default_str();
  transform->add_option("--reference-domain", ta.reference_domain, "Domain of a reference file")
      ->delimiter(',')->expected(2);
  transform->add_option("--epsilon-floor", ta.epsilon_floor, "Floor added to every bin")
      ->capture_default_str();

  InverseArgs ia;
  auto* inv = app.add_subcommand("inverse", "Densities from CDT rows");
  inv->add_option("input", ia.in, "CDT CSV")->required();
  inv->add_option("output", ia.out, "Density CSV")->required();
  inv->add_option("--grid", ia.grid, "Output bins K (default: from the sidecar)");
  inv->add_option("--domain", ia.domain, "Output domain lo,hi")->delimiter(',')->expected(2);
  inv->add_option("--meta", ia.meta, "Transform sidecar (default: <input>.json)");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Synthetic classes from a JSON config");
  generate->add_option("config", ga.config, "Generation config")->required();
  generate->add_option("--prefix", ga.prefix, "Output file prefix");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Energy signals and histograms");
  extract->add_option("input", ea.in, "Signal CSV")->required();
  extract->add_option("output", ea.out, "Feature CSV")->required();
  extract->add_option("--features", ea.features, "energy, histogram or energy-histogram")
      ->capture_default_str();
  extract->add_option("--axes", ea.axes, "1, or 3 for x,y,z triples")->capture_default_str();
  extract->add_option("--bins", ea.bins, "Histogram bins")->capture_default_str();
  extract->add_option("--range", ea.range, "Histogram range lo,hi")->delimiter(',')->expected(2);
  extract->add_option("--range-file", ea.range_file, "Range saved by an earlier extract");
  extract->add_flag("--pad", ea.pad, "Zero-pad signals to the longest length");
  extract->add_option("--epsilon-floor", ea.epsilon_floor, "Histogram floor")->capture_default_str();

  EvaluateArgs va;
  auto* evaluate = app.add_subcommand("evaluate", "Nested cross-validation from a JSON config");
  evaluate->add_option("config", va.config, "Evaluation config")->required();
  evaluate->add_option("--folds", va.folds, "Override folds (integer or loo)");

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Two-dimensional PLDA embedding");
  project->add_option("data", pa.data, "Feature CSV")->required();
  project->add_option("--train-frac", pa.train_frac, "Share of each class used for fitting")
      ->capture_default_str();
  project->add_option("--alpha", pa.alpha, "PLDA alpha")->capture_default_str();
  project->add_option("--svg", pa.svg, "SVG output")->capture_default_str();
  project->add_option("--csv", pa.csv, "Coordinate output")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.count("--seed") > 0) g.seed = seed;
    g.threads = thread_limit();
    if (!output_dir.empty()) {
      g.output_dir = output_dir;
      std::filesystem::create_directories(g.output_dir);
    }
    if (*transform) return run_transform(g, ta);
    if (*inv) return run_inverse(g, ia);
    if (*generate) return run_generate(g, ga);
    if (*extract) return run_extract(g, ea);
    if (*evaluate) return run_evaluate(g, va);
    if (*project) return run_project(g, pa);
  } catch (const UsageError& e) {
    std::cerr << "cdtkit: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RowError& e) {
    std::cerr << "cdtkit: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const cdtkit::Error& e) {
    std::cerr << "cdtkit: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitUsage : kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "cdtkit: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cdtkit: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
