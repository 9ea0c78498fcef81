#pragma once

#include "mister/error.hpp"

#include <Eigen/Dense>

#include <compare>
#include <string>

namespace mister {

/// Grayscale image, row-major, one scalar per pixel. rows() is the height and
/// cols() the width. Intensities are nominally in [0, 255] but are never
/// clamped during processing.
template <typename Scalar>
using ImageT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Image = ImageT<double>;

/// 0-based pixel coordinate. The measurement grid of a factor-s image is the
/// set of origins whose row and col are both multiples of s.
struct Origin {
  int row = 0;
  int col = 0;
  auto operator<=>(const Origin&) const = default;
};

inline int width(const Image& img) { return static_cast<int>(img.cols()); }
inline int height(const Image& img) { return static_cast<int>(img.rows()); }

/// Throws unless the image is non-empty and every value is finite.
void require_valid(const Image& img, const char* where);

/// Builds an image from a row-major list, mostly for tests.
Image make_image(int width, int height, std::initializer_list<double> values);

/// Unit-gain d x d Gaussian.
struct GaussianKernel {
  int side = 0;
  double sigma = 0.0;
  Eigen::MatrixXd taps;
};

GaussianKernel gaussian_kernel(int side, double sigma);

/// Keeps every s-th sample starting with the upper-left pixel.
Image downsample(const Image& img, int factor);

/// Places the LR samples on the measurement grid of a target_height x
/// target_width canvas and fills the rest with zeros. The target must hold
/// exactly the LR grid: ceil(target / factor) == LR size on both axes.
Image upsample_zero_fill(const Image& img, int factor, int target_width, int target_height);
Image upsample_zero_fill(const Image& img, int factor);

/// Mirror extension about the boundary sample (edge pixel not repeated).
Image reflect_pad(const Image& img, int margin);

Image crop(const Image& img, int left, int top, int width, int height);

/// Keys cubic convolution (a = -0.5) aligned so LR sample (p, q) lands on HR
/// pixel (s p, s q). Output is (s H) x (s W).
Image bicubic_interpolate(const Image& img, int factor);

/// Separable Gaussian low-pass with reflective boundaries.
Image gaussian_lowpass(const Image& img, int side, double sigma);

/// 20 log10(255 / sqrt(MSE)); +inf for identical images.
double psnr(const Image& a, const Image& b);

/// Mean over the measurement grid positions only.
double measured_mean(const Image& img, int factor);

/// Copies the LR samples onto the measurement grid of hr in place.
void enforce_measurements(Image& hr, const Image& lr, int factor);

/// True iff every measurement grid pixel of hr equals the LR sample bitwise.
bool matches_measurements(const Image& hr, const Image& lr, int factor);

/// Index into [0, n) after mirror reflection without edge repetition.
int reflect_index(int i, int n);

}  // namespace mister
