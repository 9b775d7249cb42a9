#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "symdepth/io.hpp"
#include "symdepth/matching.hpp"
#include "symdepth/metrics.hpp"
#include "symdepth/rectify.hpp"
#include "symdepth/solver.hpp"
#include "symdepth/synth.hpp"

namespace symdepth {

struct PipelineConfig {
  SolverConfig solver;
  MatcherConfig matcher;
  FilterConfig filter;
  enum class CorrSource { match, noise };
  CorrSource corr_source = CorrSource::match;  // matcher output vs the scene's
                                               // stored (degraded) pairs
  int subsample_block = 2;
  int threads = 1;
};

struct SceneOutputs {
  RectifyTransform transform;
  IntensityImage rectified_intensity;
  Mask rectified_mask;
  Flow1D flow;
  CorrespondenceSet pairs_raw;
  CorrespondenceSet pairs_filtered;
  CorrespondenceSet pairs_solver;
  RefineResult refined;
  DepthReport initial_depth, refined_depth;
  PoseReport initial_pose, refined_pose;
  std::optional<SymReport> sym_filtered;
  double wall_ms = 0.0;
};

/// Full per-scene pipeline: rectify with the (predicted) camera, produce
/// correspondences, filter, subsample, refine, evaluate against ground truth.
inline SceneOutputs process_scene(const Scene& degraded, const Scene& gt,
                                  const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SceneOutputs out;
  out.transform = build_transform(degraded.camera, degraded.frame, degraded.mask);
  out.rectified_intensity = warp_bilinear(degraded.intensity, out.transform);
  out.rectified_mask = warp_nearest(degraded.mask, out.transform);

  if (cfg.corr_source == PipelineConfig::CorrSource::match) {
    out.flow = match_scanlines(out.rectified_intensity, out.rectified_mask, cfg.matcher);
    out.pairs_raw = lift_flow_to_correspondences(out.flow, out.transform, degraded.frame).pairs;
  } else {
    out.pairs_raw = degraded.pairs;
  }
  out.pairs_filtered = consistency_filter(out.pairs_raw, cfg.filter, degraded.frame);
  out.pairs_solver = subsample_pairs(out.pairs_filtered, cfg.subsample_block);

  out.refined = refine(degraded.depth, degraded.normals_cam, degraded.mask, out.pairs_solver,
                       degraded.camera, degraded.frame, cfg.solver);

  out.initial_depth = depth_metrics(degraded.depth, gt.depth, gt.mask);
  out.refined_depth = depth_metrics(out.refined.depth, gt.depth, gt.mask);
  const double size = gt.diameter > 0 ? gt.diameter : 1.0;
  out.initial_pose = pose_metrics(degraded.camera, gt.camera, size);
  out.refined_pose = pose_metrics(out.refined.camera, gt.camera, size);
  if (!out.pairs_filtered.empty() && !gt.pairs.empty()) {
    try {
      SymReport rep = symmetry_metrics(out.pairs_filtered, gt.pairs, gt.frame);
      const Flow1D gt_flow = flow_from_pairs(gt.pairs, out.transform);
      if (cfg.corr_source == PipelineConfig::CorrSource::match)
        rep.flow_mse = flow_mse(out.flow, gt_flow);
      out.sym_filtered = rep;
    } catch (const invalid_input&) {
      // no overlapping pairs; leave the report empty
    }
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

// ---------------------------------------------------------------------------
// Scene file layout: <dir>/scene_XYZ/{manifest.json, depth.pfm, normal.pfm,
// mask.pgm, intensity.pfm, corr.txt}; <dir>/dataset.json lists the scenes.

inline SceneRecord scene_record(const Scene& scene) {
  SceneRecord rec;
  rec.width = scene.frame.width;
  rec.height = scene.frame.height;
  rec.camera_q = rotation_to_quat(scene.camera.rotation);
  rec.camera_tx = scene.camera.t_x;
  rec.camera_s = scene.camera.s;
  rec.files = {"depth.pfm", "normal.pfm", "mask.pgm", "intensity.pfm", "corr.txt"};
  rec.seed = scene.seed;
  return rec;
}

inline void write_scene(const Scene& scene, const std::filesystem::path& dir,
                        const nlohmann::json& noise = {}, const std::string& ground_truth = "") {
  std::filesystem::create_directories(dir);
  SceneRecord rec = scene_record(scene);
  rec.noise = noise;
  rec.ground_truth = ground_truth;
  write_pfm(scene.depth, dir / rec.files.depth);
  write_pfm(scene.normals_cam, dir / rec.files.normal);
  write_pgm(scene.mask, dir / rec.files.mask);
  write_pfm(scene.intensity, dir / rec.files.intensity);
  write_correspondences(scene.pairs, dir / rec.files.correspondences);
  write_manifest(rec, dir / "manifest.json");
}

inline Scene read_scene(const std::filesystem::path& manifest_path) {
  const SceneRecord rec = read_manifest(manifest_path);
  const std::filesystem::path dir = manifest_path.parent_path();
  Scene scene;
  scene.frame = rec.frame();
  scene.camera = rec.camera();
  scene.seed = rec.seed;
  scene.depth = read_pfm_gray(dir / rec.files.depth);
  scene.normals_cam = read_pfm_vec3(dir / rec.files.normal);
  scene.mask = read_pgm(dir / rec.files.mask);
  scene.intensity = read_pfm_gray(dir / rec.files.intensity);
  scene.pairs = read_correspondences(dir / rec.files.correspondences);
  if (!scene.depth.same_size(rec.width, rec.height) ||
      !scene.normals_cam.same_size(rec.width, rec.height) ||
      !scene.mask.same_size(rec.width, rec.height) ||
      !scene.intensity.same_size(rec.width, rec.height))
    throw io_error(manifest_path.string() + ": grid files disagree with the manifest size");
  scene.diameter = object_diameter(scene.depth, scene.mask, scene.camera, scene.frame);
  return scene;
}

inline std::string scene_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%03d", index);
  return buf;
}

/// Renders `n_scenes` scenes of the spec into `out_dir` and writes the dataset
/// index. The camera is resampled (by advancing the scene stream) if a draw
/// produces an empty mask.
inline std::vector<std::filesystem::path> generate_dataset(const SceneSpec& spec, int n_scenes,
                                                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> manifests;
  nlohmann::json index;
  index["spec"] = to_json(spec);
  index["scenes"] = nlohmann::json::array();
  std::uint64_t stream = 0;
  for (int i = 0; i < n_scenes; ++i) {
    Scene scene;
    for (;;) {
      try {
        scene = render(instantiate_scene(spec, stream++));
        break;
      } catch (const invalid_input&) {
        if (stream > static_cast<std::uint64_t>(n_scenes) + 1000)
          throw solver_failure("generate_dataset: cannot find a camera that sees the object");
      }
    }
    const std::filesystem::path dir = out_dir / scene_dir_name(i);
    write_scene(scene, dir);
    manifests.push_back(dir / "manifest.json");
    index["scenes"].push_back(scene_dir_name(i) + std::string("/manifest.json"));
  }
  write_json_file(index, out_dir / "dataset.json");
  return manifests;
}

inline std::vector<std::filesystem::path> dataset_manifests(const std::filesystem::path& dir) {
  const nlohmann::json index = read_json_file(dir / "dataset.json");
  if (!index.contains("scenes")) throw io_error((dir / "dataset.json").string() + ": missing scenes");
  std::vector<std::filesystem::path> out;
  for (const auto& rel : index.at("scenes")) out.push_back(dir / rel.get<std::string>());
  return out;
}

/// Applies the noise model to every scene of a clean dataset. The degraded
/// manifests point back to their clean counterparts via `ground_truth`.
inline std::vector<std::filesystem::path> corrupt_dataset(const std::filesystem::path& in_dir,
                                                          const NoiseSpec& noise,
                                                          const std::filesystem::path& out_dir) {
  const auto manifests = dataset_manifests(in_dir);
  std::filesystem::create_directories(out_dir);
  nlohmann::json index = read_json_file(in_dir / "dataset.json");
  index["noise"] = to_json(noise);
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const Scene clean = read_scene(manifests[i]);
    const Scene degraded = corrupt(clean, noise);
    const std::filesystem::path dir = out_dir / scene_dir_name(static_cast<int>(i));
    const std::filesystem::path gt_rel =
        std::filesystem::relative(manifests[i], dir);
    write_scene(degraded, dir, to_json(noise), gt_rel.string());
    out.push_back(dir / "manifest.json");
  }
  write_json_file(index, out_dir / "dataset.json");
  return out;
}

inline Scene ground_truth_of(const std::filesystem::path& manifest_path) {
  const SceneRecord rec = read_manifest(manifest_path);
  if (rec.ground_truth.empty()) return read_scene(manifest_path);
  return read_scene(manifest_path.parent_path() / rec.ground_truth);
}

// ---------------------------------------------------------------------------
// Report documents.

inline nlohmann::json to_json(const ObjectiveTerms& t) {
  return {{"total", t.total}, {"depth", t.depth}, {"normal", t.normal}, {"symmetry", t.symmetry}};
}

inline nlohmann::json to_json(const SolverReport& r) {
  return {{"objective_trace", r.objective_trace},
          {"final_terms", to_json(r.final_terms)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"stop_reason", r.stop_reason},
          {"sigma_final", r.sigma_final},
          {"weight_hist_pixel", r.weight_hist_pixel},
          {"weight_hist_edge", r.weight_hist_edge},
          {"weight_hist_pair", r.weight_hist_pair},
          {"n_pixels", r.n_pixels},
          {"n_edges", r.n_edges},
          {"n_pairs", r.n_pairs},
          {"pairs_dropped", r.pairs_dropped}};
}

inline nlohmann::json scene_outputs_json(const SceneOutputs& o) {
  nlohmann::json j;
  j["initial_depth"] = to_json(o.initial_depth);
  j["refined_depth"] = to_json(o.refined_depth);
  j["initial_pose"] = to_json(o.initial_pose);
  j["refined_pose"] = to_json(o.refined_pose);
  if (o.sym_filtered) j["symmetry"] = to_json(*o.sym_filtered);
  j["solver"] = to_json(o.refined.report);
  j["n_pairs_raw"] = o.pairs_raw.size();
  j["n_pairs_filtered"] = o.pairs_filtered.size();
  j["n_pairs_solver"] = o.pairs_solver.size();
  j["wall_ms"] = o.wall_ms;
  return j;
}

struct PipelineSummary {
  std::vector<nlohmann::json> scene_reports;
  double mean_initial_rel = 0.0;
  double mean_refined_rel = 0.0;
  double mean_initial_rms = 0.0;
  double mean_refined_rms = 0.0;
  double max_wall_ms = 0.0;

  nlohmann::json to_json_doc() const {
    nlohmann::json j;
    j["scenes"] = scene_reports;
    j["aggregate"] = {{"mean_initial_rel", mean_initial_rel},
                      {"mean_refined_rel", mean_refined_rel},
                      {"mean_initial_rms", mean_initial_rms},
                      {"mean_refined_rms", mean_refined_rms},
                      {"max_wall_ms", max_wall_ms},
                      {"n_scenes", scene_reports.size()}};
    return j;
  }
};

/// Runs the pipeline over a (degraded) dataset. Scenes are distributed over
/// `cfg.threads` workers; per-scene processing is single-threaded and seeded,
/// so results are identical for any thread count.
inline PipelineSummary run_pipeline(const std::filesystem::path& dataset_dir,
                                    const PipelineConfig& cfg) {
  const auto manifests = dataset_manifests(dataset_dir);
  std::vector<SceneOutputs> outputs(manifests.size());
  std::vector<std::string> errors(manifests.size());

  const int threads = std::max(1, cfg.threads);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= manifests.size()) return;
      try {
        const Scene degraded = read_scene(manifests[i]);
        const Scene gt = ground_truth_of(manifests[i]);
        outputs[i] = process_scene(degraded, gt, cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < manifests.size(); ++i)
    if (!errors[i].empty())
      throw solver_failure(manifests[i].string() + ": " + errors[i]);

  PipelineSummary sum;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    nlohmann::json j = scene_outputs_json(outputs[i]);
    j["scene"] = manifests[i].parent_path().filename().string();
    sum.scene_reports.push_back(std::move(j));
    sum.mean_initial_rel += outputs[i].initial_depth.rel;
    sum.mean_refined_rel += outputs[i].refined_depth.rel;
    sum.mean_initial_rms += outputs[i].initial_depth.rms;
    sum.mean_refined_rms += outputs[i].refined_depth.rms;
    sum.max_wall_ms = std::max(sum.max_wall_ms, outputs[i].wall_ms);
  }
  const double n = std::max<std::size_t>(outputs.size(), 1);
  sum.mean_initial_rel /= n;
  sum.mean_refined_rel /= n;
  sum.mean_initial_rms /= n;
  sum.mean_refined_rms /= n;
  return sum;
}

}  // namespace symdepth
