#include "specfuse/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace specfuse {

namespace {

constexpr int kWindow = 11;
constexpr Scalar kWindowSigma = 1.5;

Eigen::Array<Scalar, kWindow, 1> gaussianWindow1d() {
  Eigen::Array<Scalar, kWindow, 1> w;
  const int c = kWindow / 2;
  for (int i = 0; i < kWindow; ++i)
    w[i] = std::exp(-Scalar((i - c) * (i - c)) / (2 * kWindowSigma * kWindowSigma));
  return w / w.sum();
}

// Valid-region separable filtering with the normalized Gaussian window.
Image filterValid(const Image& x) {
  static const Eigen::Array<Scalar, kWindow, 1> w = gaussianWindow1d();
  const Index r1 = x.rows() - kWindow + 1, c1 = x.cols() - kWindow + 1;
  Image rows(r1, x.cols());
  for (Index i = 0; i < r1; ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      Scalar acc = 0;
      for (int t = 0; t < kWindow; ++t) acc += w[t] * x(i + t, j);
      rows(i, j) = acc;
    }
  Image out(r1, c1);
  for (Index i = 0; i < r1; ++i)
    for (Index j = 0; j < c1; ++j) {
      Scalar acc = 0;
      for (int t = 0; t < kWindow; ++t) acc += w[t] * rows(i, j + t);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace

Scalar ssim(const Image& x, const Image& y, Scalar dynamicRange) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ShapeMismatch("ssim: image shapes differ");
  if (!(dynamicRange > 0)) throw BadParams("ssim: dynamic range must be > 0");
  if (x.rows() < kWindow || x.cols() < kWindow)
    throw ShapeMismatch("ssim: images smaller than the 11x11 window");
  requireFinite(x, "ssim");
  requireFinite(y, "ssim");

  const Scalar c1 = (0.01 * dynamicRange) * (0.01 * dynamicRange);
  const Scalar c2 = (0.03 * dynamicRange) * (0.03 * dynamicRange);

  const Image mu1 = filterValid(x);
  const Image mu2 = filterValid(y);
  const Image sigma1 = filterValid(x * x) - mu1 * mu1;
  const Image sigma2 = filterValid(y * y) - mu2 * mu2;
  const Image sigma12 = filterValid(x * y) - mu1 * mu2;

  const Image num = (2 * mu1 * mu2 + c1) * (2 * sigma12 + c2);
  const Image den = (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1 + sigma2 + c2);
  return (num / den).mean();
}

Scalar meanSquaredError(const Image& x, const Image& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ShapeMismatch("meanSquaredError: image shapes differ");
  return squaredNorm(x - y) / Scalar(x.size());
}

Scalar psnr(const Image& x, const Image& y, Scalar dynamicRange) {
  if (!(dynamicRange > 0)) throw BadParams("psnr: dynamic range must be > 0");
  const Scalar mse = meanSquaredError(x, y);
  if (mse == 0) return std::numeric_limits<Scalar>::infinity();
  return 10 * std::log10(dynamicRange * dynamicRange / mse);
}

SimilarityReport similarity(const Image& x, const Image& y, Scalar dynamicRange) {
  SimilarityReport r;
  r.ssim = ssim(x, y, dynamicRange);
  r.meanSquaredError = meanSquaredError(x, y);
  r.psnr = psnr(x, y, dynamicRange);
  return r;
}

std::pair<Scalar, Scalar> kernelCentroid(const Kernel& k) {
  requireFinite(k, "kernelCentroid");
  if (std::abs(k.sum() - 1) > 1e-9)
    throw NotNormalized("kernelCentroid: kernel taps must sum to 1");
  Scalar row = 0, col = 0;
  for (Index a = 0; a < k.rows(); ++a)
    for (Index b = 0; b < k.cols(); ++b) {
      row += Scalar(a + 1) * k(a, b);
      col += Scalar(b + 1) * k(a, b);
    }
  return {row, col};
}

void writeSweepCsv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open sweep csv for writing: " + path);
  out << kSweepCsvHeader << "\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    if (r.failed) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,failed,failed,failed,failed\n",
                    r.lambdaU, r.lambdaK, r.gamma);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.lambdaU,
                    r.lambdaK, r.gamma, r.ssim, r.mse, r.psnr, r.finalObjective);
    }
    out << buf;
  }
}

}  // namespace specfuse
