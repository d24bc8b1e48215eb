#include "specfuse/fft2.hpp"

#include <unsupported/Eigen/FFT>

namespace specfuse {

namespace {

Eigen::FFT<Scalar>& engine() {
  // Plan caches are per length inside Eigen::FFT; keep one per thread.
  thread_local Eigen::FFT<Scalar> fft;
  return fft;
}

enum class Direction { Forward, Inverse };

void transformRows(ComplexImage& x, Direction dir) {
  const Index n = x.cols();
  if (n <= 1) return;  // kissfft rejects length-1 plans; DFT of size 1 is identity
  Eigen::VectorXcd in(n), out(n);
  for (Index i = 0; i < x.rows(); ++i) {
    in = x.row(i);
    if (dir == Direction::Forward)
      engine().fwd(out, in);
    else
      engine().inv(out, in);
    x.row(i) = out;
  }
}

void transformCols(ComplexImage& x, Direction dir) {
  const Index n = x.rows();
  if (n <= 1) return;
  Eigen::VectorXcd in(n), out(n);
  for (Index j = 0; j < x.cols(); ++j) {
    in = x.col(j);
    if (dir == Direction::Forward)
      engine().fwd(out, in);
    else
      engine().inv(out, in);
    x.col(j) = out;
  }
}

}  // namespace

ComplexImage Fft2::fwd(const Image& x) const {
  requireShape(x, shape_, "Fft2::fwd");
  ComplexImage z = x.cast<std::complex<Scalar>>();
  transformRows(z, Direction::Forward);
  transformCols(z, Direction::Forward);
  return z;
}

Image Fft2::inv(const ComplexImage& x) const {
  ComplexImage z = x;
  transformCols(z, Direction::Inverse);
  transformRows(z, Direction::Inverse);
  return z.real();
}

}  // namespace specfuse
