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

// lowlight enhance  --input <file|dir> --output <dir> [options]
// lowlight enhance  --manifest <run.json>
// lowlight evaluate --pred <dir> --gt <dir> [--orig <dir>] --report <csv>
//
// Exit codes: 0 ok, 1 input error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "lowlight/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

void print_manifest_summary(const lowlight::RunManifest& m) {
  double total = 0.0;
  for (const auto& t : m.timings) total += t.seconds;
  std::cout << m.input << " -> " << m.output << " (" << m.width << "x" << m.height << ", seed " << m.image_seed
            << ", " << lowlight::format_metric(total) << " s)";
  if (m.metrics) {
    std::cout << " psnr " << lowlight::format_metric(m.metrics->psnr) << " ssim "
              << lowlight::format_metric(m.metrics->ssim);
  }
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot low-light image enhancement"};
  app.require_subcommand(1);

  lowlight::PipelineConfig cfg;
  std::string input, output, manifest, gt;
  long long max_side = 0;
  int jobs = 1;
  bool no_tv = false, no_noise = false, no_igpacm = false, no_denoiser = false;
  bool no_sr = false, no_sc = false;
  std::optional<double> decom_lr;

  CLI::App* enhance = app.add_subcommand("enhance", "Enhance one image or a directory of images");
  enhance->add_option("--input", input, "Input PNG/PPM file or directory");
  enhance->add_option("--output", output, "Output directory");
  enhance->add_option("--manifest", manifest, "Replay the run recorded in a manifest");
  enhance->add_option("--gamma", cfg.gamma, "Illumination gamma")->capture_default_str();
  enhance->add_option("--lambda-noise", cfg.lambda_n, "Weight of the noise loss")->capture_default_str();
  enhance->add_option("--decom-iters", cfg.decom_iters, "Decomposition iterations")->capture_default_str();
  enhance->add_option("--denoise-iters", cfg.denoise_iters, "Denoiser iterations")->capture_default_str();
  enhance->add_option("--lr", cfg.lr, "Denoiser learning rate")->capture_default_str();
  enhance->add_option("--decom-lr", decom_lr, "Decomposition learning rate (default 0.003)");
  enhance->add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
  enhance->add_flag("--no-tv", no_tv, "Drop the total variation loss");
  enhance->add_flag("--no-noise-loss", no_noise, "Drop the noise loss");
  enhance->add_flag("--no-igpacm", no_igpacm, "Skip the pixel adaptive correction");
  enhance->add_flag("--no-denoiser", no_denoiser, "Skip the denoiser");
  enhance->add_flag("--no-sr", no_sr, "Drop the residual denoiser loss");
  enhance->add_flag("--no-sc", no_sc, "Drop the consistency denoiser loss");
  enhance->add_flag("--plain-mse", cfg.use_plain_mse, "Add the plain sibling MSE to the denoiser loss");
  enhance->add_flag("--igpacm-literal", cfg.igpacm_literal, "Replace RGB by guide^sigma(guide)");
  enhance->add_option("--max-side", max_side, "Shrink so the longer side is at most N (bilinear)");
  enhance->add_option("--gt", gt, "Ground truth for the metrics in the manifest (single file only)");
  enhance->add_option("--jobs", jobs, "Images processed in parallel in directory mode")->capture_default_str();
  enhance->add_option("--log-every", cfg.log_every, "Loss curve sampling interval")->capture_default_str();

  std::string pred_dir, gt_dir, orig_dir, report;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--pred", pred_dir, "Directory of enhanced images")->required();
  evaluate->add_option("--gt", gt_dir, "Directory of ground-truth images")->required();
  evaluate->add_option("--orig", orig_dir, "Directory of original inputs for LOE");
  evaluate->add_option("--report", report, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (enhance->parsed()) {
      if (!manifest.empty()) {
        print_manifest_summary(lowlight::replay_manifest(lowlight::read_manifest(manifest)));
        return kExitOk;
      }
      if (input.empty() || output.empty()) {
        std::cerr << "enhance needs --input and --output (or --manifest)\n";
        return kExitInput;
      }
      cfg.use_tv = !no_tv;
      cfg.use_noise_loss = !no_noise;
      cfg.use_igpacm = !no_igpacm;
      cfg.use_denoiser = !no_denoiser;
      cfg.use_sr = !no_sr;
      cfg.use_sc = !no_sc;
      if (decom_lr) cfg.decom_lr = *decom_lr;
      cfg.validate();
      lowlight::EnhanceOptions opts;
      opts.max_side = static_cast<lowlight::Index>(max_side);
      if (!gt.empty()) opts.ground_truth = gt;
      for (const auto& m : lowlight::enhance_path(input, output, cfg, opts, jobs)) print_manifest_summary(m);
      return kExitOk;
    }
    std::optional<std::filesystem::path> orig;
    if (!orig_dir.empty()) orig = orig_dir;
    const lowlight::Evaluation e = lowlight::evaluate_directories_to_csv(pred_dir, gt_dir, orig, report);
    std::cout << lowlight::evaluation_csv(e);
    return kExitOk;
  } catch (const lowlight::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
