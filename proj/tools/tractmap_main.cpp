#include "CLI11.hpp"

#include "tractmap/eval.hpp"
#include "tractmap/io.hpp"
#include "tractmap/optim.hpp"
#include "tractmap/rng.hpp"
#include "tractmap/synth.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 42;
  std::vector<double> voxel_size{2.0, 2.0, 2.0};
  int resample_points = 20;
  std::string output_dir = ".";
  int threads = 1;
};

struct SynthOptions {
  Eigen::Index bundle_size = 60;
  Eigen::Index distractors = 300;
  double jitter = 1.0;
  std::vector<double> displacement{5.0, 5.0, 0.0};
  std::vector<double> offset{0.0, 0.0, 0.0};
  double centerline_radius = 40.0;
  Eigen::Index centerline_points = 20;
  std::string format = "trk";
};

struct MapOptions {
  std::string source_path;
  std::string target_path;
  std::string target_tract_path;
  std::string affine_path;
  double alpha = 3.0;
  int iterations = 1000;
  std::string init = "nn";
  bool greedy_only = false;
  double cooling = 0.995;
  std::optional<double> initial_temperature;
  std::vector<int> checkpoints;
};

struct EvalOptions {
  std::string tract_a;
  std::string mapped_b;
  std::string mapping;
  std::string truth;
};

struct ConvertOptions {
  std::string in_path;
  std::string out_path;
};

tractmap::Point3 to_point(const std::vector<double>& v) {
  return tractmap::Point3(v[0], v[1], v[2]);
}

tractmap::Tractography maybe_resample(const tractmap::Tractography& t, int k) {
  if (k == 0) return t;
  if (k < 2) throw std::invalid_argument("--resample must be 0 (disable) or >= 2");
  return tractmap::resample(t, k);
}

std::string tract_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".json" ? ".json" : ".trk";
}

void note_written(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

void run_synth(const GlobalOptions& g, const SynthOptions& o) {
  tractmap::BundleSpec spec;
  spec.centerline = tractmap::default_centerline(o.centerline_radius, o.centerline_points);
  spec.n_streamlines = o.bundle_size;
  spec.jitter_sigma = o.jitter;
  spec.seed = tractmap::derive_seed(g.seed, "generate");
  spec.offset = to_point(o.offset);

  tractmap::SubjectPair pair =
      tractmap::generate_subject_pair(spec, o.distractors, to_point(o.displacement));
  pair.source_tract.voxel_size = to_point(g.voxel_size);
  pair.target_full.voxel_size = to_point(g.voxel_size);

  const fs::path dir(g.output_dir);
  fs::create_directories(dir);
  const std::string ext = "." + o.format;
  const fs::path source_path = dir / ("source_tract" + ext);
  const fs::path target_path = dir / ("target_full" + ext);
  const fs::path truth_path = dir / "ground_truth.json";
  const fs::path affine_path = dir / "affine.txt";
  tractmap::write_tractography_file(source_path, pair.source_tract);
  tractmap::write_tractography_file(target_path, pair.target_full);
  tractmap::atomic_write_file(truth_path, tractmap::write_mapping_json(pair.ground_truth));

  // Known source-to-target registration (the synthetic stand-in for the
  // volumetric registration that precedes mapping on real data).
  std::string affine_text;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      double v = row == col ? 1.0 : 0.0;
      if (col == 3 && row < 3) v = o.displacement[static_cast<std::size_t>(row)];
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      affine_text += buf;
      affine_text += col == 3 ? '\n' : ' ';
    }
  }
  tractmap::atomic_write_file(affine_path, affine_text);
  note_written(source_path);
  note_written(target_path);
  note_written(truth_path);
  note_written(affine_path);
}

void run_map(const GlobalOptions& g, const MapOptions& o) {
  using namespace tractmap;

  Tractography source = read_tractography_file(o.source_path);
  const Tractography target = read_tractography_file(o.target_path);
  if (!o.affine_path.empty())
    source = apply_affine(source, read_affine_text(read_file_text(o.affine_path)));

  const Tractography src_c = maybe_resample(source, g.resample_points);
  const Tractography tgt_c = maybe_resample(target, g.resample_points);

  // Candidate target indices: the superset around the tract when one is
  // given, otherwise the whole target tractography.
  std::vector<Eigen::Index> candidates;
  Eigen::Index tract_b_size = target.size();
  if (!o.target_tract_path.empty()) {
    const auto tract_indices = read_index_set_json(read_file_text(o.target_tract_path));
    for (Eigen::Index idx : tract_indices)
      if (idx >= target.size())
        throw std::invalid_argument("--target-tract: index " + std::to_string(idx) +
                                    " out of range of the target tractography");
    tract_b_size = static_cast<Eigen::Index>(tract_indices.size());
    candidates = superset_filter(tgt_c, tract_indices, o.alpha).indices;
  } else {
    candidates.resize(static_cast<std::size_t>(target.size()));
    for (Eigen::Index j = 0; j < target.size(); ++j) candidates[j] = j;
  }

  Tractography b_sub;
  b_sub.streamlines.reserve(candidates.size());
  for (Eigen::Index j : candidates) b_sub.streamlines.push_back(tgt_c.streamlines[j]);

  const DistanceMatrix a = distance_matrix(src_c, g.threads);
  const DistanceMatrix b = distance_matrix(b_sub, g.threads);

  Mapping q0;
  if (o.init == "nn") {
    q0 = nn_init(cross_distance_matrix(src_c, b_sub, g.threads));
  } else {
    q0 = random_init(src_c.size(), b_sub.size(), derive_seed(g.seed, "init"));
  }

  AnnealSchedule schedule;
  schedule.iterations = o.iterations;
  schedule.cooling = o.cooling;
  schedule.initial_temperature = o.initial_temperature;
  schedule.seed = derive_seed(g.seed, "anneal");
  schedule.greedy_only = o.greedy_only;
  schedule.snapshot_iterations = o.checkpoints;
  const AnnealTrace trace = anneal(a, b, q0, schedule);

  const auto to_global = [&](const Mapping& local) {
    Mapping global(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) global[i] = candidates[local[i]];
    return global;
  };

  const Point3 vs = to_point(g.voxel_size);
  const auto jaccard_of = [&](const Mapping& local_q) {
    return jaccard_overlap(source, mapped_tract(target, local_q, candidates), vs).jaccard;
  };
  std::vector<std::pair<std::string, double>> metrics;
  metrics.emplace_back("init", jaccard_of(q0));
  for (const auto& [iteration, snapshot_q] : trace.snapshots)
    if (iteration != o.iterations)
      metrics.emplace_back("SA-" + std::to_string(iteration), jaccard_of(snapshot_q));
  metrics.emplace_back("SA-" + std::to_string(o.iterations), jaccard_of(trace.final_mapping));

  PairResult row;
  row.source_id = source.name;
  row.target_id = target.name;
  row.n_tract_a = source.size();
  row.n_tract_b = tract_b_size;
  row.n_superset_b = static_cast<Eigen::Index>(candidates.size());
  row.metrics = std::move(metrics);
  row.trace = trace;
  std::vector<PairResult> rows;
  rows.push_back(std::move(row));
  const ExperimentReport report = build_report(std::move(rows));

  const fs::path dir(g.output_dir);
  fs::create_directories(dir);
  const fs::path mapping_path = dir / "mapping.json";
  const fs::path trace_path = dir / "trace.csv";
  const fs::path mapped_path = dir / ("mapped_tract" + tract_extension(o.target_path));
  const fs::path report_csv_path = dir / "report.csv";
  const fs::path report_json_path = dir / "report.json";

  atomic_write_file(
      mapping_path,
      write_mapping_json(to_global(trace.final_mapping),
                         {{"loss", trace.final_loss},
                          {"normalized_loss", trace.final_normalized_loss},
                          {"initial_loss", trace.initial_loss},
                          {"initial_normalized_loss",
                           normalized_loss(trace.initial_loss, source.size())}}));
  atomic_write_file(trace_path, trace_csv(trace));
  write_tractography_file(mapped_path, mapped_tract(target, trace.final_mapping, candidates));
  atomic_write_file(report_csv_path, report_csv(report));
  atomic_write_file(report_json_path, report_json(report));

  std::cout << "superset size " << candidates.size() << " of " << target.size() << '\n'
            << "initial normalized loss "
            << normalized_loss(trace.initial_loss, source.size()) << '\n'
            << "final normalized loss " << trace.final_normalized_loss << '\n';
  note_written(mapping_path);
  note_written(trace_path);
  note_written(mapped_path);
  note_written(report_csv_path);
  note_written(report_json_path);
}

void run_eval(const GlobalOptions& g, const EvalOptions& o) {
  using namespace tractmap;
  const Tractography a = read_tractography_file(o.tract_a);
  const Tractography b = read_tractography_file(o.mapped_b);
  const OverlapReport report = jaccard_overlap(a, b, to_point(g.voxel_size));

  std::vector<std::pair<std::string, double>> extras;
  if (!o.truth.empty()) {
    const Mapping q = read_mapping_json(read_file_text(o.mapping));
    const Mapping truth = read_mapping_json(read_file_text(o.truth));
    extras.emplace_back("recovery_rate", recovery_rate(q, truth));
  }

  const fs::path dir(g.output_dir);
  fs::create_directories(dir);
  const fs::path json_path = dir / "overlap.json";
  const fs::path csv_path = dir / "overlap.csv";
  atomic_write_file(json_path, overlap_json(report, extras));
  atomic_write_file(csv_path, overlap_csv(report, extras));

  std::cout << "jaccard " << report.jaccard << '\n';
  for (const auto& [key, value] : extras) std::cout << key << ' ' << value << '\n';
  note_written(json_path);
  note_written(csv_path);
}

void run_convert(const ConvertOptions& o) {
  const tractmap::Tractography t = tractmap::read_tractography_file(o.in_path);
  tractmap::write_tractography_file(o.out_path, t);
  note_written(o.out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tractography-to-tractography mapping via graph-discrepancy optimization"};
  app.fallthrough();
  app.require_subcommand(1);

  const CLI::Validator kResampleCount(
      [](std::string& s) -> std::string {
        try {
          const long v = std::stol(s);
          if (v == 0 || v >= 2) return {};
        } catch (...) {
        }
        return "must be 0 (disable) or an integer >= 2";
      },
      "0|>=2");
  const CLI::Validator kOpenUnitInterval(
      [](std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v < 1.0) return {};
        } catch (...) {
        }
        return "must be in the open interval (0, 1)";
      },
      "(0,1)");

  GlobalOptions g;
  g.threads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  app.add_option("--seed", g.seed, "root RNG seed; stages derive named sub-seeds from it")
      ->capture_default_str();
  app.add_option("--voxel-size", g.voxel_size, "overlap-evaluation voxel size, mm per axis")
      ->expected(3)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--resample", g.resample_points,
                 "resample streamlines to this many points before distance computation; "
                 "0 disables")
      ->check(kResampleCount)
      ->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "directory for output files")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for distance matrices")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "generate a synthetic subject pair with ground truth");
  synth->add_option("--bundle-size", so.bundle_size, "streamlines in the source bundle")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--distractors", so.distractors, "unrelated target streamlines")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--jitter", so.jitter, "per-vertex Gaussian noise sigma, mm")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--displacement", so.displacement,
                    "inter-subject displacement of the homologous bundle, mm")
      ->expected(3)
      ->capture_default_str();
  synth->add_option("--offset", so.offset, "placement of the source bundle, mm")
      ->expected(3)
      ->capture_default_str();
  synth->add_option("--centerline-radius", so.centerline_radius, "arc radius, mm")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--centerline-points", so.centerline_points, "points per centerline")
      ->check(CLI::Range(static_cast<Eigen::Index>(2), static_cast<Eigen::Index>(100000)))
      ->capture_default_str();
  synth->add_option("--format", so.format, "tractography file format")
      ->check(CLI::IsMember({"trk", "json"}))
      ->capture_default_str();
  synth->callback([&] { run_synth(g, so); });

  MapOptions mo;
  auto* map = app.add_subcommand("map", "map a source tract into a target tractography");
  map->add_option("--source-tract", mo.source_path, "source tract file (.trk or .json)")
      ->required();
  map->add_option("--target-full", mo.target_path, "target tractography file")->required();
  map->add_option("--target-tract", mo.target_tract_path,
                  "JSON index set of the homologous tract in the target; enables superset "
                  "filtering");
  map->add_option("--affine", mo.affine_path,
                  "text file with a 4x4 row-major affine applied to the source");
  map->add_option("--alpha", mo.alpha, "superset radius multiplier")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  map->add_option("--iterations", mo.iterations, "annealing iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  map->add_option("--init", mo.init, "initial mapping strategy")
      ->check(CLI::IsMember({"nn", "random"}))
      ->capture_default_str();
  map->add_flag("--greedy-only", mo.greedy_only, "disable uphill (Metropolis) moves");
  map->add_option("--cooling", mo.cooling, "geometric cooling factor")
      ->check(kOpenUnitInterval)
      ->capture_default_str();
  map->add_option("--initial-temperature", mo.initial_temperature,
                  "override the automatic initial temperature (initial squared loss / N)")
      ->check(CLI::PositiveNumber);
  map->add_option("--checkpoints", mo.checkpoints,
                  "iterations at which to snapshot the mapping for extra report columns")
      ->check(CLI::NonNegativeNumber);
  map->callback([&] { run_map(g, mo); });

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "voxel-overlap and recovery metrics");
  eval->add_option("--tract-a", eo.tract_a, "source tract file")->required();
  eval->add_option("--mapped-b", eo.mapped_b, "mapped target tract file")->required();
  auto* mapping_opt = eval->add_option("--mapping", eo.mapping, "mapping JSON to score");
  eval->add_option("--truth", eo.truth, "ground-truth mapping JSON")->needs(mapping_opt);
  eval->callback([&] { run_eval(g, eo); });

  ConvertOptions co;
  auto* convert = app.add_subcommand("convert", "convert between .trk and interchange JSON");
  convert->add_option("--in", co.in_path, "input tractography file")->required();
  convert->add_option("--out", co.out_path, "output tractography file")->required();
  convert->callback([&] { run_convert(co); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const tractmap::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
