#include "mister/image.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mister {

namespace {

void require_factor(int factor, const char* where) {
  if (factor != 2 && factor != 3) {
    throw Error(std::string(where) + ": factor must be 2 or 3, got " + std::to_string(factor));
  }
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Keys cubic convolution kernel with a = -0.5.
double keys(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

// Interpolates along the rows axis: out has out_rows rows, in.cols() cols.
Image upsample_rows(const Image& in, int factor, int out_rows) {
  const int n = height(in);
  Image out(out_rows, in.cols());
  for (int y = 0; y < out_rows; ++y) {
    const int base = y / factor;
    const double t = static_cast<double>(y - base * factor) / factor;
    if (t == 0.0) {
      out.row(y) = in.row(base);
      continue;
    }
    out.row(y).setZero();
    for (int k = -1; k <= 2; ++k) {
      out.row(y) += keys(t - k) * in.row(reflect_index(base + k, n));
    }
  }
  return out;
}

std::vector<double> gaussian_taps_1d(int side, double sigma) {
  std::vector<double> taps(side);
  const int half = side / 2;
  double sum = 0.0;
  for (int i = 0; i < side; ++i) {
    const double x = i - half;
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

}  // namespace

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void require_valid(const Image& img, const char* where) {
  if (img.rows() < 1 || img.cols() < 1) throw Error(std::string(where) + ": empty image");
  if (!img.allFinite()) throw Error(std::string(where) + ": image holds non-finite values");
}

Image make_image(int w, int h, std::initializer_list<double> values) {
  if (static_cast<std::size_t>(w) * h != values.size()) {
    throw Error("make_image: value count does not match width x height");
  }
  Image img(h, w);
  std::copy(values.begin(), values.end(), img.data());
  return img;
}

GaussianKernel gaussian_kernel(int side, double sigma) {
  if (side < 1 || side % 2 == 0) throw Error("gaussian kernel side must be a positive odd integer");
  if (!(sigma > 0.0)) throw Error("gaussian sigma must be positive");
  const auto t = gaussian_taps_1d(side, sigma);
  const Eigen::Map<const Eigen::VectorXd> v(t.data(), side);
  GaussianKernel kernel{side, sigma, v * v.transpose()};
  kernel.taps /= kernel.taps.sum();
  return kernel;
}

Image downsample(const Image& img, int factor) {
  require_factor(factor, "downsample");
  if (width(img) < factor || height(img) < factor) {
    throw Error("downsample: image smaller than the factor");
  }
  const int h = ceil_div(height(img), factor);
  const int w = ceil_div(width(img), factor);
  Image out(h, w);
  for (int p = 0; p < h; ++p)
    for (int q = 0; q < w; ++q) out(p, q) = img(p * factor, q * factor);
  return out;
}

Image upsample_zero_fill(const Image& img, int factor, int target_width, int target_height) {
  if (factor < 1) throw Error("upsample_zero_fill: factor must be positive");
  if (ceil_div(target_height, factor) != height(img) || ceil_div(target_width, factor) != width(img)) {
    throw Error("upsample_zero_fill: target size " + std::to_string(target_width) + "x" +
                std::to_string(target_height) + " does not hold the measurement grid of a " +
                std::to_string(width(img)) + "x" + std::to_string(height(img)) + " image");
  }
  Image out = Image::Zero(target_height, target_width);
  for (int p = 0; p < height(img); ++p)
    for (int q = 0; q < width(img); ++q) out(p * factor, q * factor) = img(p, q);
  return out;
}

Image upsample_zero_fill(const Image& img, int factor) {
  return upsample_zero_fill(img, factor, factor * width(img), factor * height(img));
}

Image reflect_pad(const Image& img, int margin) {
  if (margin < 0) throw Error("reflect_pad: negative margin");
  if (margin >= std::min(width(img), height(img))) {
    throw Error("reflect_pad: margin must be smaller than both image sides");
  }
  const int h = height(img), w = width(img);
  Image out(h + 2 * margin, w + 2 * margin);
  for (int y = 0; y < out.rows(); ++y) {
    const int sy = reflect_index(y - margin, h);
    for (int x = 0; x < out.cols(); ++x) out(y, x) = img(sy, reflect_index(x - margin, w));
  }
  return out;
}

Image crop(const Image& img, int left, int top, int w, int h) {
  if (left < 0 || top < 0 || w < 1 || h < 1 || left + w > width(img) || top + h > height(img)) {
    throw Error("crop: rectangle (" + std::to_string(left) + "," + std::to_string(top) + ") " +
                std::to_string(w) + "x" + std::to_string(h) + " is outside the " +
                std::to_string(width(img)) + "x" + std::to_string(height(img)) + " image");
  }
  return img.block(top, left, h, w);
}

Image bicubic_interpolate(const Image& img, int factor) {
  require_factor(factor, "bicubic_interpolate");
  require_valid(img, "bicubic_interpolate");
  const Image rows = upsample_rows(img, factor, factor * height(img));
  const Image cols = upsample_rows(rows.transpose(), factor, factor * width(img));
  return cols.transpose();
}

Image gaussian_lowpass(const Image& img, int side, double sigma) {
  if (side < 1 || side % 2 == 0) throw Error("gaussian_lowpass: filter side must be odd");
  if (!(sigma > 0.0)) throw Error("gaussian_lowpass: sigma must be positive");
  require_valid(img, "gaussian_lowpass");
  const auto taps = gaussian_taps_1d(side, sigma);
  const int half = side / 2;
  const int h = height(img), w = width(img);

  Image horizontal(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < side; ++k) acc += taps[k] * img(y, reflect_index(x + k - half, w));
      horizontal(y, x) = acc;
    }
  }
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    out.row(y).setZero();
    for (int k = 0; k < side; ++k) out.row(y) += taps[k] * horizontal.row(reflect_index(y + k - half, h));
  }
  return out;
}

double psnr(const Image& a, const Image& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("psnr: image dimensions differ (" + std::to_string(width(a)) + "x" +
                std::to_string(height(a)) + " vs " + std::to_string(width(b)) + "x" +
                std::to_string(height(b)) + ")");
  }
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(255.0 / std::sqrt(mse));
}

double measured_mean(const Image& img, int factor) {
  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < height(img); y += factor)
    for (int x = 0; x < width(img); x += factor) {
      sum += img(y, x);
      ++count;
    }
  return sum / static_cast<double>(count);
}

void enforce_measurements(Image& hr, const Image& lr, int factor) {
  for (int p = 0; p < height(lr); ++p) {
    const int y = p * factor;
    if (y >= height(hr)) break;
    for (int q = 0; q < width(lr); ++q) {
      const int x = q * factor;
      if (x >= width(hr)) break;
      hr(y, x) = lr(p, q);
    }
  }
}

bool matches_measurements(const Image& hr, const Image& lr, int factor) {
  for (int p = 0; p < height(lr); ++p)
    for (int q = 0; q < width(lr); ++q) {
      const int y = p * factor, x = q * factor;
      if (y >= height(hr) || x >= width(hr)) continue;
      if (hr(y, x) != lr(p, q)) return false;
    }
  return true;
}

}  // namespace mister
