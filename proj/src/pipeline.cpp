#include "mister/pipeline.hpp"

#include "mister/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace mister {

GuideMode parse_guide_mode(const std::string& name) {
  if (name == "mister") return GuideMode::mister;
  if (name == "ec1") return GuideMode::ec1;
  if (name == "ec2") return GuideMode::ec2;
  if (name == "ec3") return GuideMode::ec3;
  if (name == "ec4") return GuideMode::ec4;
  throw Error("unknown guide mode '" + name + "' (expected mister, ec1, ec2, ec3 or ec4)");
}

std::string guide_mode_name(GuideMode mode) {
  switch (mode) {
    case GuideMode::mister: return "mister";
    case GuideMode::ec1: return "ec1";
    case GuideMode::ec2: return "ec2";
    case GuideMode::ec3: return "ec3";
    case GuideMode::ec4: return "ec4";
  }
  return "mister";
}

PipelineConfig default_config(int factor) {
  if (factor != 2 && factor != 3) throw Error("factor must be 2 or 3, got " + std::to_string(factor));
  PipelineConfig cfg;
  cfg.factor = factor;
  if (factor == 3) {
    cfg.stage1.side_a = 12;
    cfg.stage1.side_b = 12;
    cfg.stage1.lambda_a = 1.0;
    cfg.stage1.lambda_b = 1.0;
    cfg.stage1.step = 3;
    cfg.stage2.side = 9;
    cfg.stage2.count = 6;
    cfg.stage2.lambda = 0.2;
    cfg.stage2.step = 3;
    cfg.stage3.side_a = 9;
    cfg.stage3.side_b = 6;
  }
  return cfg;
}

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

void check_window(int w, const std::string& key) { check(w >= 1 && w % 2 == 1, key + ": window side must be odd"); }

void check_side(int n, int factor, const std::string& key) {
  check(n >= factor && n % factor == 0,
        key + ": patch side must be " + (factor == 2 ? std::string("even") : "divisible by 3") + " for factor " +
            std::to_string(factor));
}

}  // namespace

void validate(const PipelineConfig& c) {
  check(c.factor == 2 || c.factor == 3, "factor must be 2 or 3");
  const int s = c.factor;
  const SvarConfig& v = c.guide.svar;
  check_window(v.window, "guide.svar.window");
  check(v.side >= 1, "guide.svar.side must be positive");
  check(v.count >= 1, "guide.svar.count must be positive");
  check(v.components >= 1 && v.components <= v.side * v.side, "guide.svar.components must lie in [1, side^2]");
  check(v.iterations >= 0, "guide.svar.iterations must be nonnegative");
  check(v.step >= 1, "guide.svar.step must be positive");
  check(v.lpf_side % 2 == 1 && v.lpf_sigma > 0, "guide.svar.lpf: filter side must be odd and sigma positive");
  check(c.guide.blur_side % 2 == 1 && c.guide.blur_sigma > 0, "guide.blur: filter side must be odd and sigma positive");
  check(c.guide.passes >= 0, "guide.passes must be nonnegative");
  check(c.ec3_side % 2 == 1 && c.ec3_sigma > 0, "ec3: filter side must be odd and sigma positive");

  check_side(c.stage1.side_a, s, "stage1.n_a");
  check_side(c.stage1.side_b, s, "stage1.n_b");
  check_window(c.stage1.window_a, "stage1.w_a");
  check_window(c.stage1.window_b, "stage1.w_b");
  check(c.stage1.lambda_a >= 0 && c.stage1.lambda_b >= 0, "stage1: lambda must be nonnegative");
  check(c.stage1.count >= 1 && c.stage1.iterations >= 1, "stage1: count and iterations must be positive");
  check(c.stage1.decay_scale > 0, "stage1.decay_scale must be positive");
  check(c.stage1.step >= s && c.stage1.step % s == 0, "stage1.step must be a multiple of the factor");

  check_side(c.stage2.side, s, "stage2.n");
  check_window(c.stage2.window, "stage2.w");
  check(c.stage2.lambda >= 0, "stage2: lambda must be nonnegative");
  check(c.stage2.count >= 1 && c.stage2.iterations >= 0, "stage2: count must be positive");
  check(c.stage2.decay_scale > 0, "stage2.decay_scale must be positive");
  check(c.stage2.step >= s && c.stage2.step % s == 0, "stage2.step must be a multiple of the factor");

  check_side(c.stage3.side_a, s, "stage3.n_a");
  check_side(c.stage3.side_b, s, "stage3.n_b");
  check_window(c.stage3.window_a, "stage3.w_a");
  check_window(c.stage3.window_b, "stage3.w_b");
  check(c.stage3.lambda_a >= 0 && c.stage3.lambda_b >= 0, "stage3: lambda must be nonnegative");
  check(c.stage3.count >= 1, "stage3.k must be positive");
  check(c.stage3.iterations_a >= 0 && c.stage3.iterations_b >= 0, "stage3: iterations must be nonnegative");
  check(c.stage3.step >= 1, "stage3.step must be positive");
  check(c.stage3.similarity_floor > 0, "stage3.similarity_floor must be positive");

  check_side(c.stage4.side_a, 2, "stage4.n_a");
  check_side(c.stage4.side_b, 2, "stage4.n_b");
  check_window(c.stage4.window, "stage4.w");
  check(c.stage4.alpha_a >= 0 && c.stage4.alpha_b >= 0, "stage4: alpha must be nonnegative");
  check(c.stage4.eps > 0, "stage4.eps must be positive");
  check(c.stage4.count >= 1, "stage4.k must be positive");
  check(c.stage4.iterations_a >= 0 && c.stage4.iterations_b >= 0, "stage4: iterations must be nonnegative");
  check(c.stage4.decay_scale > 0, "stage4.decay_scale must be positive");
  check(c.stage4.step >= 1, "stage4.step must be positive");

  check(c.margin >= 0, "margin must be nonnegative");
  check(c.threads >= 1, "threads must be positive");
}

Interpolation interpolate(const Image& lr_in, const PipelineConfig& cfg) {
  validate(cfg);
  require_valid(lr_in, "interpolate");
  const int s = cfg.factor, t = cfg.threads;
  const int m = std::min(cfg.margin, std::min(width(lr_in), height(lr_in)) - 1);
  const Image lr = reflect_pad(lr_in, m);
  const int ow = s * width(lr_in), oh = s * height(lr_in);

  Interpolation result;
  auto record = [&](const char* name, const Image& hr) {
    if (cfg.dump_stages) result.stages.push_back({name, crop(hr, s * m, s * m, ow, oh)});
  };
  auto run_stage1 = [&](const Image& l, const Image& g) { return stage1(l, g, cfg.stage1, s, t); };

  Image guide;
  Image weight_guide;
  switch (cfg.guide_mode) {
    case GuideMode::ec1:
      guide = bicubic_interpolate(lr, s);
      break;
    case GuideMode::ec3:
      guide = bicubic_interpolate(gaussian_lowpass(lr, cfg.ec3_side, cfg.ec3_sigma), s);
      break;
    case GuideMode::ec4:
      guide = aliasing_removed_image(lr, cfg.guide.svar, s, t);
      record("ar", guide);
      break;
    case GuideMode::mister:
    case GuideMode::ec2: {
      const Image ar = aliasing_removed_image(lr, cfg.guide.svar, s, t);
      record("ar", ar);
      guide = guide_from_ar(lr, ar, cfg.guide, run_stage1);
      if (cfg.guide_mode == GuideMode::ec2) weight_guide = bicubic_interpolate(lr, s);
      break;
    }
  }
  record("guide", guide);

  Image hr = stage1(lr, guide, cfg.stage1, s, t, weight_guide.size() ? &weight_guide : nullptr,
                    [&](int it, const Image& img) {
                      if (it == 1) record("s1a", img);
                    });
  record("s1", hr);
  hr = stage2(hr, cfg.stage2, s, t);
  record("s2", hr);
  hr = stage3(hr, cfg.stage3, s, t);
  record("s3", hr);
  if (s == 2) {
    hr = stage4(hr, lr, cfg.stage4, s, t);
    result.ran_stage4 = true;
    record("s4", hr);
  }
  enforce_measurements(hr, lr, s);
  result.output = crop(hr, s * m, s * m, ow, oh);
  return result;
}

BenchmarkRow score_image(const std::string& name, const Image& truth, const PipelineConfig& cfg) {
  const int s = cfg.factor;
  const Image lr = downsample(truth, s);
  const Image bic = crop(bicubic_interpolate(lr, s), 0, 0, width(truth), height(truth));
  PipelineConfig quiet = cfg;
  quiet.dump_stages = false;
  const Image out = crop(interpolate(lr, quiet).output, 0, 0, width(truth), height(truth));
  return {name, psnr(bic, truth), psnr(out, truth)};
}

BenchmarkTable benchmark(const std::filesystem::path& dir, const PipelineConfig& cfg, std::ostream* warn) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("benchmark: " + dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });

  BenchmarkTable table;
  for (const fs::path& f : files) {
    Image truth;
    try {
      truth = load_image(f.string());
      if (width(truth) < cfg.factor || height(truth) < cfg.factor) throw Error("image smaller than the factor");
    } catch (const std::exception& e) {
      if (warn) *warn << "warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
      continue;
    }
    table.rows.push_back(score_image(f.stem().string(), truth, cfg));
  }
  if (table.rows.empty()) throw Error("benchmark: no readable images in " + dir.string());

  table.average.image = "average";
  for (const auto& r : table.rows) {
    table.average.bicubic_db += r.bicubic_db;
    table.average.mister_db += r.mister_db;
  }
  table.average.bicubic_db /= static_cast<double>(table.rows.size());
  table.average.mister_db /= static_cast<double>(table.rows.size());
  return table;
}

std::string format_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", db);
  return buf;
}

std::string benchmark_csv(const BenchmarkTable& table) {
  std::string out = "image,bicubic_db,mister_db\n";
  auto line = [&](const BenchmarkRow& r) {
    out += r.image + "," + format_db(r.bicubic_db) + "," + format_db(r.mister_db) + "\n";
  };
  for (const auto& r : table.rows) line(r);
  line(table.average);
  return out;
}

}  // namespace mister
