#include "specfuse/core.hpp"

namespace specfuse {

ProblemGeometry geometryFrom(Shape2 dataShape, Shape2 kernelShape, int samplingFactor) {
  if (kernelShape.rows % 2 == 0 || kernelShape.cols % 2 == 0)
    throw EvenKernel("kernel sides must be odd, got " + std::to_string(kernelShape.rows) +
                     "x" + std::to_string(kernelShape.cols));
  if (samplingFactor < 1)
    throw BadFactor("sampling factor must be >= 1, got " + std::to_string(samplingFactor));
  if (dataShape.rows < 1 || dataShape.cols < 1)
    throw BadParams("data shape must be positive");

  ProblemGeometry g;
  g.dataShape = dataShape;
  g.kernelShape = kernelShape;
  g.samplingFactor = samplingFactor;
  g.margin = {(kernelShape.rows - 1) / 2, (kernelShape.cols - 1) / 2};
  g.imageShape = {samplingFactor * dataShape.rows + 2 * g.margin.rows,
                  samplingFactor * dataShape.cols + 2 * g.margin.cols};
  return g;
}

GradientField gradient(const Image& u) {
  const Index m1 = u.rows(), m2 = u.cols();
  GradientField g;
  g.d1.resize(m1, m2);
  g.d2.resize(m1, m2);
  if (m1 > 1) {
    g.d1.topRows(m1 - 1) = u.bottomRows(m1 - 1) - u.topRows(m1 - 1);
    g.d1.row(m1 - 1) = u.row(0) - u.row(m1 - 1);
  } else {
    g.d1.setZero();
  }
  if (m2 > 1) {
    g.d2.leftCols(m2 - 1) = u.rightCols(m2 - 1) - u.leftCols(m2 - 1);
    g.d2.col(m2 - 1) = u.col(0) - u.col(m2 - 1);
  } else {
    g.d2.setZero();
  }
  return g;
}

Image divergence(const GradientField& g) {
  if (g.d1.rows() != g.d2.rows() || g.d1.cols() != g.d2.cols())
    throw ShapeMismatch("divergence: component shapes differ");
  const Index m1 = g.d1.rows(), m2 = g.d1.cols();
  // Negative adjoint of the forward-difference gradient: <grad u, g> = -<u, div g>.
  Image out(m1, m2);
  if (m1 > 1) {
    out.bottomRows(m1 - 1) = g.d1.bottomRows(m1 - 1) - g.d1.topRows(m1 - 1);
    out.row(0) = g.d1.row(0) - g.d1.row(m1 - 1);
  } else {
    out.setZero();
  }
  if (m2 > 1) {
    out.rightCols(m2 - 1) += g.d2.rightCols(m2 - 1) - g.d2.leftCols(m2 - 1);
    out.col(0) += g.d2.col(0) - g.d2.col(m2 - 1);
  }
  return out;
}

void requireFinite(const Image& u, const char* what) {
  if (!u.allFinite()) throw NonFinite(std::string(what) + ": non-finite values");
}

void requireShape(const Image& u, Shape2 s, const char* what) {
  if (u.rows() != s.rows || u.cols() != s.cols)
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(s.rows) + "x" +
                        std::to_string(s.cols) + ", got " + std::to_string(u.rows()) + "x" +
                        std::to_string(u.cols()));
}

}  // namespace specfuse
