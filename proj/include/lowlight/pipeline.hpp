/*
 * Copyright 2026 The lowlight Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LOWLIGHT_PIPELINE_HPP
#define LOWLIGHT_PIPELINE_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowlight/config.hpp"
#include "lowlight/decomposition.hpp"
#include "lowlight/denoiser.hpp"
#include "lowlight/metrics.hpp"

namespace lowlight {

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

/// Everything one in-memory run produces.
struct PipelineResult {
  DecompositionOutput decomposition;
  Tensor corrected;  // after the correction step (or the coarse result when it is off)
  Tensor output;     // final image in [0, 1], before quantization
  std::vector<DenoiseLoss> denoise_curve;
  std::vector<StageTime> timings;
};

/// decompose -> coarse -> correction -> denoise, as switched by cfg.
PipelineResult run_pipeline(const Tensor& image, const PipelineConfig& cfg);

/// Correction and denoising on an existing decomposition; used to evaluate
/// several settings that share one decomposition.
PipelineResult finish_pipeline(DecompositionOutput decomposition, const PipelineConfig& cfg);

/// Stable 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view text);

/// Per-image seed: base seed XOR hash of the file name (without directories).
std::uint64_t image_seed(std::uint64_t base_seed, const std::filesystem::path& input);

struct EnhanceOptions {
  Index max_side = 0;  // 0 keeps the native resolution
  std::optional<std::filesystem::path> ground_truth;
};

/// Record of one enhance run, written as JSON next to the output image.
struct RunManifest {
  PipelineConfig config;  // config.seed is the base seed
  std::uint64_t image_seed = 0;
  std::string input;
  std::string output;
  Index max_side = 0;
  Index height = 0;
  Index width = 0;
  std::vector<StageTime> timings;
  std::vector<DecompositionLoss> decom_curve;
  std::vector<DenoiseLoss> denoise_curve;
  std::optional<std::string> ground_truth;
  std::optional<MetricReport> metrics;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

RunManifest read_manifest(const std::filesystem::path& path);
std::filesystem::path manifest_path_for(const std::filesystem::path& output_image);

/// Enhances one file into output_dir/<stem>.png and writes
/// output_dir/<stem>.json.
RunManifest enhance_file(const std::filesystem::path& input, const std::filesystem::path& output_dir,
                         const PipelineConfig& cfg, const EnhanceOptions& opts = {});

/// Enhances a file, or every image in a directory (sorted by name) with up
/// to `jobs` images in flight.
std::vector<RunManifest> enhance_path(const std::filesystem::path& input, const std::filesystem::path& output_dir,
                                      const PipelineConfig& cfg, const EnhanceOptions& opts = {}, int jobs = 1);

/// Re-runs the enhancement described by a manifest, writing to its output path.
RunManifest replay_manifest(const RunManifest& m);

struct EvaluationRow {
  std::string name;
  MetricReport report;
};

struct Evaluation {
  std::vector<EvaluationRow> rows;
  MetricReport mean;
};

/// Pairs images by file name and computes PSNR, SSIM, MAE against gt, LOE
/// against orig (gt when absent) and NES of the prediction.
Evaluation evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                    const std::optional<std::filesystem::path>& orig_dir = std::nullopt);

Evaluation evaluate_directories_to_csv(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                       const std::optional<std::filesystem::path>& orig_dir,
                                       const std::filesystem::path& report);

/// CSV with columns image,psnr,ssim,mae,loe,nes, 4 decimals, "inf" for
/// identical images, and a final "mean" row.
std::string evaluation_csv(const Evaluation& e);

/// Fixed 4-decimal formatting independent of the C locale.
std::string format_metric(double v);

}  // namespace lowlight

#endif  // LOWLIGHT_PIPELINE_HPP
