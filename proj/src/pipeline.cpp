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

#include "lowlight/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "lowlight/correction.hpp"
#include "lowlight/image_io.hpp"

namespace lowlight {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double metric_from(const json& j) {
  if (j.is_string()) return j.get<std::string>() == "-inf" ? -kPsnrIdentical : kPsnrIdentical;
  return j.get<double>();
}

json to_json(const MetricReport& r) {
  return {{"psnr", metric_value(r.psnr)},
          {"ssim", r.ssim},
          {"mae", r.mae},
          {"loe", r.loe},
          {"nes", r.nes}};
}

MetricReport metrics_from_json(const json& j) {
  return {metric_from(j.at("psnr")), j.at("ssim").get<double>(), j.at("mae").get<double>(),
          j.at("loe").get<double>(), j.at("nes").get<double>()};
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

// ---- pipeline ----------------------------------------------------------------

PipelineResult finish_pipeline(DecompositionOutput decomposition, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  r.decomposition = std::move(decomposition);
  apply_gamma(r.decomposition, cfg.gamma, cfg.epsilon);
  const DecompositionOutput& d = r.decomposition;

  Stopwatch correction_clock;
  if (cfg.use_igpacm) {
    r.corrected = cfg.igpacm_literal ? pixel_adaptive_correct_literal(d.coarse, d.L2)
                                     : pixel_adaptive_correct(d.coarse, d.L2);
  } else {
    r.corrected = d.coarse;
  }
  r.timings.push_back({"correction", correction_clock.seconds()});

  if (cfg.use_denoiser) {
    Stopwatch denoise_clock;
    DenoiserResult den = optimize_denoiser(r.corrected, cfg);
    r.output = final_restore(r.corrected, den.net);
    r.denoise_curve = std::move(den.curve);
    r.timings.push_back({"denoise", denoise_clock.seconds()});
  } else {
    r.output = r.corrected;
  }
  return r;
}

PipelineResult run_pipeline(const Tensor& image, const PipelineConfig& cfg) {
  cfg.validate();
  Stopwatch clock;
  DecompositionOutput d = optimize_decomposition(image, cfg);
  const double decom_seconds = clock.seconds();
  PipelineResult r = finish_pipeline(std::move(d), cfg);
  r.timings.insert(r.timings.begin(), {"decomposition", decom_seconds});
  return r;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t image_seed(std::uint64_t base_seed, const fs::path& input) {
  return base_seed ^ fnv1a(input.filename().string());
}

// ---- manifest ----------------------------------------------------------------

json to_json(const PipelineConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda_n", c.lambda_n},
          {"decom_iters", c.decom_iters},
          {"denoise_iters", c.denoise_iters},
          {"lr", c.lr},
          {"decom_lr", c.decom_lr},
          {"seed", c.seed},
          {"epsilon", c.epsilon},
          {"tau", c.tau},
          {"use_tv", c.use_tv},
          {"use_noise_loss", c.use_noise_loss},
          {"use_igpacm", c.use_igpacm},
          {"use_denoiser", c.use_denoiser},
          {"use_sr", c.use_sr},
          {"use_sc", c.use_sc},
          {"use_plain_mse", c.use_plain_mse},
          {"igpacm_literal", c.igpacm_literal},
          {"log_every", c.log_every}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.lambda_n = j.at("lambda_n").get<double>();
  c.decom_iters = j.at("decom_iters").get<long>();
  c.denoise_iters = j.at("denoise_iters").get<long>();
  c.lr = j.at("lr").get<double>();
  c.decom_lr = j.at("decom_lr").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epsilon = j.at("epsilon").get<double>();
  c.tau = j.at("tau").get<double>();
  c.use_tv = j.at("use_tv").get<bool>();
  c.use_noise_loss = j.at("use_noise_loss").get<bool>();
  c.use_igpacm = j.at("use_igpacm").get<bool>();
  c.use_denoiser = j.at("use_denoiser").get<bool>();
  c.use_sr = j.at("use_sr").get<bool>();
  c.use_sc = j.at("use_sc").get<bool>();
  c.use_plain_mse = j.at("use_plain_mse").get<bool>();
  c.igpacm_literal = j.at("igpacm_literal").get<bool>();
  c.log_every = j.at("log_every").get<long>();
  c.validate();
  return c;
}

json to_json(const RunManifest& m) {
  json timings = json::array();
  for (const StageTime& t : m.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  json decom = json::array();
  for (const DecompositionLoss& l : m.decom_curve) {
    decom.push_back({{"iteration", l.iteration}, {"total", l.total}, {"recon", l.recon}, {"tv", l.tv},
                     {"noise", l.noise}});
  }
  json denoise = json::array();
  for (const DenoiseLoss& l : m.denoise_curve) {
    denoise.push_back({{"iteration", l.iteration}, {"total", l.total}, {"sr", l.sr}, {"sc", l.sc},
                       {"plain", l.plain}});
  }
  json j = {{"config", to_json(m.config)},
            {"image_seed", m.image_seed},
            {"input", m.input},
            {"output", m.output},
            {"max_side", m.max_side},
            {"height", m.height},
            {"width", m.width},
            {"timings", timings},
            {"decomposition_loss", decom},
            {"denoise_loss", denoise}};
  j["ground_truth"] = m.ground_truth ? json(*m.ground_truth) : json(nullptr);
  j["metrics"] = m.metrics ? to_json(*m.metrics) : json(nullptr);
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.config = config_from_json(j.at("config"));
  m.image_seed = j.at("image_seed").get<std::uint64_t>();
  m.input = j.at("input").get<std::string>();
  m.output = j.at("output").get<std::string>();
  m.max_side = j.at("max_side").get<Index>();
  m.height = j.at("height").get<Index>();
  m.width = j.at("width").get<Index>();
  for (const json& t : j.at("timings")) m.timings.push_back({t.at("stage"), t.at("seconds")});
  for (const json& l : j.at("decomposition_loss")) {
    m.decom_curve.push_back({l.at("iteration"), l.at("total"), l.at("recon"), l.at("tv"), l.at("noise")});
  }
  for (const json& l : j.at("denoise_loss")) {
    m.denoise_curve.push_back({l.at("iteration"), l.at("total"), l.at("sr"), l.at("sc"), l.at("plain")});
  }
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) m.ground_truth = j.at("ground_truth");
  if (j.contains("metrics") && !j.at("metrics").is_null()) m.metrics = metrics_from_json(j.at("metrics"));
  return m;
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open manifest");
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": invalid manifest: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": invalid manifest: " + e.what());
  }
}

fs::path manifest_path_for(const fs::path& output_image) {
  fs::path p = output_image;
  p.replace_extension(".json");
  return p;
}

// ---- enhance -------------------------------------------------------------------

namespace {

RunManifest enhance_to(const fs::path& input, const fs::path& output, const PipelineConfig& cfg,
                       const EnhanceOptions& opts) {
  Tensor image = load_image(input);
  if (opts.max_side > 0) image = fit_max_side(image, opts.max_side);

  PipelineConfig run_cfg = cfg;
  run_cfg.seed = image_seed(cfg.seed, input);
  PipelineResult r = run_pipeline(image, run_cfg);

  const Tensor written = quantize(r.output);
  if (!output.parent_path().empty()) fs::create_directories(output.parent_path());
  save_png(output, written);

  RunManifest m;
  m.config = cfg;
  m.image_seed = run_cfg.seed;
  m.input = fs::absolute(input).string();
  m.output = fs::absolute(output).string();
  m.max_side = opts.max_side;
  m.height = image.height();
  m.width = image.width();
  m.timings = std::move(r.timings);
  m.decom_curve = std::move(r.decomposition.curve);
  m.denoise_curve = std::move(r.denoise_curve);
  if (opts.ground_truth) {
    Tensor gt = load_image(*opts.ground_truth);
    if (opts.max_side > 0) gt = fit_max_side(gt, opts.max_side);
    m.ground_truth = fs::absolute(*opts.ground_truth).string();
    m.metrics = compute_metrics(written, gt, image);
  }

  std::ofstream out(manifest_path_for(output));
  if (!out) throw InputError(manifest_path_for(output).string() + ": cannot write manifest");
  out << to_json(m).dump(2) << "\n";
  return m;
}

}  // namespace

RunManifest enhance_file(const fs::path& input, const fs::path& output_dir, const PipelineConfig& cfg,
                         const EnhanceOptions& opts) {
  fs::path output = output_dir / input.filename();
  output.replace_extension(".png");
  return enhance_to(input, output, cfg, opts);
}

std::vector<RunManifest> enhance_path(const fs::path& input, const fs::path& output_dir, const PipelineConfig& cfg,
                                      const EnhanceOptions& opts, int jobs) {
  if (!fs::exists(input)) throw InputError(input.string() + ": no such file or directory");
  if (!fs::is_directory(input)) return {enhance_file(input, output_dir, cfg, opts)};
  if (opts.ground_truth) throw InputError("--gt applies to a single input file");

  const std::vector<fs::path> files = list_images(input);
  if (files.empty()) throw InputError(input.string() + ": no PNG or PPM images found");
  std::vector<RunManifest> results(files.size());
  std::vector<std::exception_ptr> errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        results[i] = enhance_file(files[i], output_dir, cfg, opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, files.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

RunManifest replay_manifest(const RunManifest& m) {
  EnhanceOptions opts;
  opts.max_side = m.max_side;
  if (m.ground_truth) opts.ground_truth = *m.ground_truth;
  return enhance_to(m.input, m.output, m.config, opts);
}

// ---- evaluate ------------------------------------------------------------------

Evaluation evaluate(const fs::path& pred_dir, const fs::path& gt_dir, const std::optional<fs::path>& orig_dir) {
  const std::vector<fs::path> preds = list_images(pred_dir);
  std::set<std::string> pred_names, gt_names;
  for (const fs::path& p : preds) pred_names.insert(p.filename().string());
  for (const fs::path& p : list_images(gt_dir)) gt_names.insert(p.filename().string());

  std::vector<std::string> missing_gt, missing_pred;
  std::set_difference(pred_names.begin(), pred_names.end(), gt_names.begin(), gt_names.end(),
                      std::back_inserter(missing_gt));
  std::set_difference(gt_names.begin(), gt_names.end(), pred_names.begin(), pred_names.end(),
                      std::back_inserter(missing_pred));
  if (!missing_gt.empty() || !missing_pred.empty()) {
    std::string msg = "prediction and ground-truth file sets differ";
    if (!missing_gt.empty()) msg += "; missing in " + gt_dir.string() + ": " + join_names(missing_gt);
    if (!missing_pred.empty()) msg += "; missing in " + pred_dir.string() + ": " + join_names(missing_pred);
    throw InputError(msg);
  }
  if (pred_names.empty()) throw InputError(pred_dir.string() + ": no PNG or PPM images found");

  Evaluation e;
  for (const std::string& name : pred_names) {
    const Tensor pred = load_image(pred_dir / name);
    const Tensor gt = load_image(gt_dir / name);
    Tensor orig = gt;
    if (orig_dir) {
      const fs::path p = *orig_dir / name;
      if (!fs::exists(p)) throw InputError(p.string() + ": missing original image");
      orig = load_image(p);
    }
    if (!same_shape(pred, gt)) {
      throw InputError(name + ": prediction " + shape_string(pred.shape()) + " and ground truth " +
                       shape_string(gt.shape()) + " differ in size");
    }
    e.rows.push_back({name, compute_metrics(pred, gt, orig)});
  }
  const double n = static_cast<double>(e.rows.size());
  for (const EvaluationRow& r : e.rows) {
    e.mean.psnr += r.report.psnr / n;
    e.mean.ssim += r.report.ssim / n;
    e.mean.mae += r.report.mae / n;
    e.mean.loe += r.report.loe / n;
    e.mean.nes += r.report.nes / n;
  }
  return e;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
  return std::string(buf, res.ptr);
}

std::string evaluation_csv(const Evaluation& e) {
  std::string out = "image,psnr,ssim,mae,loe,nes\n";
  auto row = [&out](const std::string& name, const MetricReport& r) {
    out += name + "," + format_metric(r.psnr) + "," + format_metric(r.ssim) + "," + format_metric(r.mae) + "," +
           format_metric(r.loe) + "," + format_metric(r.nes) + "\n";
  };
  for (const EvaluationRow& r : e.rows) row(r.name, r.report);
  row("mean", e.mean);
  return out;
}

Evaluation evaluate_directories_to_csv(const fs::path& pred_dir, const fs::path& gt_dir,
                                       const std::optional<fs::path>& orig_dir, const fs::path& report) {
  Evaluation e = evaluate(pred_dir, gt_dir, orig_dir);
  if (!report.parent_path().empty()) fs::create_directories(report.parent_path());
  std::ofstream out(report);
  if (!out) throw InputError(report.string() + ": cannot write report");
  out << evaluation_csv(e);
  return e;
}

}  // namespace lowlight
