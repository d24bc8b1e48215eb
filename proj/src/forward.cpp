#include "specfuse/forward.hpp"

#include <algorithm>

namespace specfuse {

namespace {

void requireKernelShape(const Kernel& k, const ProblemGeometry& g, const char* what) {
  if (k.rows() != g.kernelShape.rows || k.cols() != g.kernelShape.cols)
    throw ShapeMismatch(std::string(what) + ": kernel shape mismatch");
}

// B^T S^T: spreads each data value over its s x s block (scaled 1/s^2) and
// zero-pads the margin back to image size.
Image spreadDataToImage(const Image& y, const ProblemGeometry& g) {
  requireShape(y, g.dataShape, "adjoint data");
  const int s = g.samplingFactor;
  const Scalar w = Scalar(1) / (Scalar(s) * Scalar(s));
  Image out = Image::Zero(g.imageShape.rows, g.imageShape.cols);
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.cols(); ++j)
      out.block(g.margin.rows + i * s, g.margin.cols + j * s, s, s).setConstant(y(i, j) * w);
  return out;
}

}  // namespace

ComplexImage ForwardPlan::kernelSpectrum(const Kernel& k) const {
  return fft.fwd(embedKernel(k, geometry));
}

ComplexImage ForwardPlan::imageSpectrum(const Image& u) const {
  requireShape(u, geometry.imageShape, "imageSpectrum");
  return fft.fwd(u);
}

Image embedKernel(const Kernel& k, const ProblemGeometry& geometry) {
  requireKernelShape(k, geometry, "embedKernel");
  const Index m1 = geometry.imageShape.rows, m2 = geometry.imageShape.cols;
  const Index l1 = geometry.margin.rows, l2 = geometry.margin.cols;
  if (k.rows() > m1 || k.cols() > m2) throw ShapeMismatch("embedKernel: kernel larger than image");
  Image e = Image::Zero(m1, m2);
  for (Index a = 0; a < k.rows(); ++a) {
    const Index i = (a - l1 + m1) % m1;
    for (Index b = 0; b < k.cols(); ++b) e(i, (b - l2 + m2) % m2) = k(a, b);
  }
  return e;
}

Kernel restrictKernel(const Image& w, const ProblemGeometry& geometry) {
  requireShape(w, geometry.imageShape, "restrictKernel");
  const Index m1 = w.rows(), m2 = w.cols();
  const Index l1 = geometry.margin.rows, l2 = geometry.margin.cols;
  Kernel k(geometry.kernelShape.rows, geometry.kernelShape.cols);
  for (Index a = 0; a < k.rows(); ++a) {
    const Index i = (a - l1 + m1) % m1;
    for (Index b = 0; b < k.cols(); ++b) k(a, b) = w(i, (b - l2 + m2) % m2);
  }
  return k;
}

Image convolve(const Image& u, const Kernel& k, const ForwardPlan& plan) {
  return convolve(u, plan.kernelSpectrum(k), plan);
}

Image convolve(const Image& u, const ComplexImage& kernelSpec, const ForwardPlan& plan) {
  requireShape(u, plan.geometry.imageShape, "convolve");
  return plan.fft.inv(kernelSpec * plan.fft.fwd(u));
}

Image clipBoundary(const Image& u, const ProblemGeometry& geometry) {
  requireShape(u, geometry.imageShape, "clipBoundary");
  return u.block(geometry.margin.rows, geometry.margin.cols,
                 geometry.imageShape.rows - 2 * geometry.margin.rows,
                 geometry.imageShape.cols - 2 * geometry.margin.cols);
}

Image sample(const Image& u, int s) {
  if (s < 1) throw BadFactor("sample: factor must be >= 1");
  if (u.rows() % s != 0 || u.cols() % s != 0)
    throw NotDivisible("sample: image sides not divisible by " + std::to_string(s));
  if (s == 1) return u;
  const Index n1 = u.rows() / s, n2 = u.cols() / s;
  const Scalar w = Scalar(1) / (Scalar(s) * Scalar(s));
  Image out(n1, n2);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) out(i, j) = u.block(i * s, j * s, s, s).sum() * w;
  return out;
}

Image applyA(const Image& u, const Kernel& k, const ForwardPlan& plan) {
  requireKernelShape(k, plan.geometry, "applyA");
  return applyA(u, plan.kernelSpectrum(k), plan);
}

Image applyA(const Image& u, const ComplexImage& kernelSpec, const ForwardPlan& plan) {
  return sample(clipBoundary(convolve(u, kernelSpec, plan), plan.geometry),
                plan.geometry.samplingFactor);
}

Image applyAOnKernel(const Kernel& k, const Image& u, const ForwardPlan& plan) {
  return applyAOnKernel(k, plan.imageSpectrum(u), plan);
}

Image applyAOnKernel(const Kernel& k, const ComplexImage& imageSpec, const ForwardPlan& plan) {
  requireKernelShape(k, plan.geometry, "applyAOnKernel");
  const Image z = embedKernel(k, plan.geometry);
  Image conv = plan.fft.inv(plan.fft.fwd(z) * imageSpec);
  return sample(clipBoundary(conv, plan.geometry), plan.geometry.samplingFactor);
}

Image adjointAImage(const Image& y, const Kernel& k, const ForwardPlan& plan) {
  requireKernelShape(k, plan.geometry, "adjointAImage");
  return adjointAImage(y, plan.kernelSpectrum(k), plan);
}

Image adjointAImage(const Image& y, const ComplexImage& kernelSpec, const ForwardPlan& plan) {
  const Image w = spreadDataToImage(y, plan.geometry);
  return plan.fft.inv(kernelSpec.conjugate() * plan.fft.fwd(w));
}

Kernel adjointAKernel(const Image& y, const Image& u, const ForwardPlan& plan) {
  return adjointAKernel(y, plan.imageSpectrum(u), plan);
}

Kernel adjointAKernel(const Image& y, const ComplexImage& imageSpec, const ForwardPlan& plan) {
  const Image w = spreadDataToImage(y, plan.geometry);
  const Image t = plan.fft.inv(imageSpec.conjugate() * plan.fft.fwd(w));
  return restrictKernel(t, plan.geometry);
}

Image upsampleInit(const Image& f, const ProblemGeometry& geometry) {
  requireShape(f, geometry.dataShape, "upsampleInit");
  const Index m1 = geometry.imageShape.rows, m2 = geometry.imageShape.cols;
  const Index l1 = geometry.margin.rows, l2 = geometry.margin.cols;
  const Index c1 = m1 - 2 * l1, c2 = m2 - 2 * l2;
  const int s = geometry.samplingFactor;
  Image out(m1, m2);
  for (Index i = 0; i < m1; ++i) {
    const Index ci = std::clamp<Index>(i - l1, 0, c1 - 1) / s;
    for (Index j = 0; j < m2; ++j) {
      const Index cj = std::clamp<Index>(j - l2, 0, c2 - 1) / s;
      out(i, j) = f(ci, cj);
    }
  }
  return out;
}

}  // namespace specfuse
