#include "mister/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

namespace mister {

namespace {

// Calls f(key, field) for every configurable field.
template <typename Config, typename F>
void visit(Config& c, F&& f) {
  f("factor", c.factor);
  f("guide_mode", c.guide_mode);
  f("margin", c.margin);
  f("threads", c.threads);

  f("guide.svar.n", c.guide.svar.side);
  f("guide.svar.k_ar", c.guide.svar.count);
  f("guide.svar.w", c.guide.svar.window);
  f("guide.svar.d", c.guide.svar.lpf_side);
  f("guide.svar.sigma", c.guide.svar.lpf_sigma);
  f("guide.svar.components", c.guide.svar.components);
  f("guide.svar.iterations", c.guide.svar.iterations);
  f("guide.svar.step", c.guide.svar.step);
  f("guide.svar.lpf_every_iteration", c.guide.svar.lpf_every_iteration);
  f("guide.blur_d", c.guide.blur_side);
  f("guide.blur_sigma", c.guide.blur_sigma);
  f("guide.passes", c.guide.passes);
  f("ec3.d", c.ec3_side);
  f("ec3.sigma", c.ec3_sigma);

  f("stage1.n_a", c.stage1.side_a);
  f("stage1.n_b", c.stage1.side_b);
  f("stage1.k", c.stage1.count);
  f("stage1.w_a", c.stage1.window_a);
  f("stage1.w_b", c.stage1.window_b);
  f("stage1.lambda_a", c.stage1.lambda_a);
  f("stage1.lambda_b", c.stage1.lambda_b);
  f("stage1.c_w_scale", c.stage1.decay_scale);
  f("stage1.iterations", c.stage1.iterations);
  f("stage1.step", c.stage1.step);

  f("stage2.n", c.stage2.side);
  f("stage2.k", c.stage2.count);
  f("stage2.w", c.stage2.window);
  f("stage2.lambda", c.stage2.lambda);
  f("stage2.c_w_scale", c.stage2.decay_scale);
  f("stage2.iterations", c.stage2.iterations);
  f("stage2.step", c.stage2.step);

  f("stage3.n_a", c.stage3.side_a);
  f("stage3.n_b", c.stage3.side_b);
  f("stage3.k", c.stage3.count);
  f("stage3.w_a", c.stage3.window_a);
  f("stage3.w_b", c.stage3.window_b);
  f("stage3.lambda_a", c.stage3.lambda_a);
  f("stage3.lambda_b", c.stage3.lambda_b);
  f("stage3.iterations_a", c.stage3.iterations_a);
  f("stage3.iterations_b", c.stage3.iterations_b);
  f("stage3.step", c.stage3.step);
  f("stage3.similarity_floor", c.stage3.similarity_floor);
  f("stage3.keep", c.stage3.keep);

  f("stage4.n_a", c.stage4.side_a);
  f("stage4.n_b", c.stage4.side_b);
  f("stage4.k", c.stage4.count);
  f("stage4.w", c.stage4.window);
  f("stage4.alpha_a", c.stage4.alpha_a);
  f("stage4.alpha_b", c.stage4.alpha_b);
  f("stage4.th_a", c.stage4.threshold_a);
  f("stage4.th_b", c.stage4.threshold_b);
  f("stage4.eps", c.stage4.eps);
  f("stage4.iterations_a", c.stage4.iterations_a);
  f("stage4.iterations_b", c.stage4.iterations_b);
  f("stage4.c_w_scale", c.stage4.decay_scale);
  f("stage4.step", c.stage4.step);
  f("stage4.threshold_mode", c.stage4.mode);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error("config line " + std::to_string(line) + ": " + what);
}

template <typename T>
void assign(T& field, const std::string& key, const Entry& e) {
  const std::string& v = e.value;
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1") field = true;
    else if (v == "false" || v == "0") field = false;
    else fail(e.line, key + ": expected true or false, got '" + v + "'");
  } else if constexpr (std::is_same_v<T, int>) {
    int out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) fail(e.line, key + ": expected an integer, got '" + v + "'");
    field = out;
  } else if constexpr (std::is_same_v<T, double>) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) fail(e.line, key + ": expected a number, got '" + v + "'");
    field = out;
  } else if constexpr (std::is_same_v<T, GuideMode>) {
    try {
      field = parse_guide_mode(v);
    } catch (const Error& err) {
      fail(e.line, key + ": " + err.what());
    }
  } else if constexpr (std::is_same_v<T, KeepMask>) {
    if (v == "intra_patch") field = KeepMask::intra_patch;
    else if (v == "measured") field = KeepMask::measured;
    else fail(e.line, key + ": expected intra_patch or measured, got '" + v + "'");
  } else if constexpr (std::is_same_v<T, ThresholdMode>) {
    if (v == "single") field = ThresholdMode::single;
    else if (v == "squared") field = ThresholdMode::squared;
    else fail(e.line, key + ": expected single or squared, got '" + v + "'");
  }
}

template <typename T>
std::string render(const T& field) {
  if constexpr (std::is_same_v<T, bool>) {
    return field ? "true" : "false";
  } else if constexpr (std::is_same_v<T, int>) {
    return std::to_string(field);
  } else if constexpr (std::is_same_v<T, double>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", field);
    return buf;
  } else if constexpr (std::is_same_v<T, GuideMode>) {
    return guide_mode_name(field);
  } else if constexpr (std::is_same_v<T, KeepMask>) {
    return field == KeepMask::intra_patch ? "intra_patch" : "measured";
  } else {
    return field == ThresholdMode::single ? "single" : "squared";
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  PipelineConfig c;
  visit(c, [&](const char* key, auto&) { keys.push_back(key); });
  return keys;
}

PipelineConfig parse_config(const std::string& text, std::optional<int> factor_override) {
  const auto known = config_keys();
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (value.empty()) fail(line, key + ": missing value");
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(line, "unknown key '" + key + "'");
    if (entries.count(key)) fail(line, key + ": duplicate key (first set on line " + std::to_string(entries[key].line) + ")");
    entries[key] = {value, line};
  }

  int factor = 2;
  if (auto it = entries.find("factor"); it != entries.end()) assign(factor, "factor", it->second);
  if (factor_override) factor = *factor_override;
  if (factor != 2 && factor != 3) throw Error("factor must be 2 or 3, got " + std::to_string(factor));

  PipelineConfig cfg = default_config(factor);
  visit(cfg, [&](const char* key, auto& field) {
    if (std::string(key) == "factor") return;
    if (auto it = entries.find(key); it != entries.end()) assign(field, key, it->second);
  });
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path, std::optional<int> factor_override) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), factor_override);
}

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  visit(cfg, [&](const char* key, const auto& field) { out += std::string(key) + " = " + render(field) + "\n"; });
  return out;
}

}  // namespace mister
