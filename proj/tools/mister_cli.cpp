#include "mister/config.hpp"
#include "mister/image_io.hpp"
#include "mister/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mister;

namespace {

struct Options {
  std::optional<int> factor;
  std::string guide_mode;
  std::string config_path;
  std::optional<int> threads;
  bool print_config = false;
};

PipelineConfig resolve(const Options& o) {
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MISTER_CONFIG")) path = env;
  }
  PipelineConfig cfg = path.empty() ? parse_config("", o.factor) : load_config(path, o.factor);
  if (!o.guide_mode.empty()) cfg.guide_mode = parse_guide_mode(o.guide_mode);
  if (o.threads) cfg.threads = *o.threads;
  validate(cfg);
  return cfg;
}

void add_pipeline_flags(CLI::App* app, Options& o) {
  app->add_option("--factor", o.factor, "Interpolation factor")->check(CLI::IsMember({2, 3}));
  app->add_option("--guide-mode", o.guide_mode, "Guide image construction")
      ->check(CLI::IsMember({"mister", "ec1", "ec2", "ec3", "ec4"}));
  app->add_option("--config", o.config_path, "Parameter file (default: $MISTER_CONFIG)");
  app->add_option("--threads", o.threads, "Worker threads; never changes results")->check(CLI::PositiveNumber);
  app->add_flag("--print-config", o.print_config, "Echo the effective parameters");
}

int cmd_interpolate(const Options& o, const std::string& in, const std::string& out, bool dump,
                    const std::string& reference) {
  PipelineConfig cfg = resolve(o);
  if (o.print_config) std::cout << format_config(cfg);
  cfg.dump_stages = dump;
  const Image lr = load_image(in);
  const Interpolation result = interpolate(lr, cfg);
  save_image(result.output, out);
  if (dump) {
    const fs::path base = fs::path(out).parent_path() / fs::path(out).stem();
    for (const StageImage& st : result.stages) save_image(st.image, base.string() + "." + st.name + ".pgm");
  }
  if (!reference.empty()) {
    const Image gt = load_image(reference);
    if (width(gt) > width(result.output) || height(gt) > height(result.output)) {
      throw Error("reference is larger than the interpolated image");
    }
    const Image cropped = crop(result.output, 0, 0, width(gt), height(gt));
    std::cout << "psnr_db=" << format_db(psnr(cropped, gt)) << "\n";
  }
  return 0;
}

int cmd_benchmark(const Options& o, const std::string& dir, const std::string& csv) {
  const PipelineConfig cfg = resolve(o);
  if (o.print_config) std::cout << format_config(cfg);
  const BenchmarkTable table = benchmark(dir, cfg, &std::cerr);
  const std::string text = benchmark_csv(table);
  if (csv.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(csv, std::ios::binary);
    if (!f) throw Error("cannot write " + csv);
    f << text;
    if (!f.flush()) throw Error("cannot write " + csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-image interpolation by patch self-similarity"};
  app.require_subcommand(0, 1);
  Options opts;
  bool top_print = false;
  std::optional<int> top_factor;
  std::string top_config;
  app.add_flag("--print-config", top_print, "Echo the effective parameters and exit");
  app.add_option("--factor", top_factor, "Factor used with --print-config")->check(CLI::IsMember({2, 3}));
  app.add_option("--config", top_config, "Parameter file used with --print-config");

  std::string in, out, reference, dir, csv, a, b;
  bool dump = false;

  auto* interp = app.add_subcommand("interpolate", "Interpolate one image");
  add_pipeline_flags(interp, opts);
  interp->add_option("input", in, "LR image (.pgm or .png)")->required();
  interp->add_option("output", out, "Output path")->required();
  interp->add_flag("--dump-stages", dump, "Write <stem>.<stage>.pgm for every intermediate");
  interp->add_option("--reference", reference, "Ground truth; prints psnr_db=<value>");

  auto* bench = app.add_subcommand("benchmark", "PSNR table over a directory of ground-truth images");
  add_pipeline_flags(bench, opts);
  bench->add_option("dir", dir, "Directory of .pgm/.png images")->required();
  bench->add_option("--csv", csv, "Write the CSV here instead of stdout");

  int factor = 2;
  auto* down = app.add_subcommand("downsample", "Keep every factor-th pixel from the upper-left one");
  down->add_option("--factor", factor, "Factor")->check(CLI::IsMember({2, 3}));
  down->add_option("input", in)->required();
  down->add_option("output", out)->required();

  auto* score = app.add_subcommand("psnr", "PSNR between two images of equal size");
  score->add_option("a", a)->required();
  score->add_option("b", b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*interp) return cmd_interpolate(opts, in, out, dump, reference);
    if (*bench) return cmd_benchmark(opts, dir, csv);
    if (*down) {
      save_image(downsample(load_image(in), factor), out);
      return 0;
    }
    if (*score) {
      std::cout << "psnr_db=" << format_db(psnr(load_image(a), load_image(b))) << "\n";
      return 0;
    }
    if (top_print) {
      opts.factor = top_factor;
      opts.config_path = top_config;
      std::cout << format_config(resolve(opts));
      return 0;
    }
    std::cout << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
