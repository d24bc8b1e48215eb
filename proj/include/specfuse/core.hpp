#ifndef SPECFUSE_CORE_HPP
#define SPECFUSE_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace specfuse {

using Scalar = double;
using Index = Eigen::Index;

// Dense pixel grids, row-major with (row, col) indexing.
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Kernel = Image;
using ComplexImage =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error { using Error::Error; };
struct EvenKernel : Error { using Error::Error; };
struct BadFactor : Error { using Error::Error; };
struct NotDivisible : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct BadStep : Error { using Error::Error; };
struct BadParams : Error { using Error::Error; };
struct BacktrackStall : Error { using Error::Error; };
struct InnerSolveDiverged : Error { using Error::Error; };
struct NotNormalized : Error { using Error::Error; };
struct RadiusTooLarge : Error { using Error::Error; };
struct OffsetOutOfWindow : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct UnsupportedFormat : Error { using Error::Error; };
struct CorruptFile : Error { using Error::Error; };
struct GeometryMismatch : Error { using Error::Error; };

struct Shape2 {
  Index rows = 0;
  Index cols = 0;

  friend bool operator==(const Shape2&, const Shape2&) = default;
  Index count() const { return rows * cols; }
};

inline Shape2 shapeOf(const Image& u) { return {u.rows(), u.cols()}; }

// Ties together kernel size r, margin l, sampling factor s, data size n and
// image size m via m - 2l = s*n.
struct ProblemGeometry {
  Shape2 imageShape;   // m
  Shape2 kernelShape;  // r, odd sides
  int samplingFactor = 1;
  Shape2 dataShape;    // n
  Shape2 margin;       // l = (r-1)/2
};

ProblemGeometry geometryFrom(Shape2 dataShape, Shape2 kernelShape, int samplingFactor);

// Forward-difference gradient with periodic wrap; d1 is the row direction,
// d2 the column direction.
struct GradientField {
  Image d1;
  Image d2;
};

// Per-pixel directions xi with |xi_i| <= gamma.
struct VectorField {
  Image x1;
  Image x2;
  Scalar gamma = 0;
};

struct Rgb {
  Image r;
  Image g;
  Image b;
};

GradientField gradient(const Image& u);
Image divergence(const GradientField& g);

inline Scalar dot(const Image& a, const Image& b) { return (a * b).sum(); }
inline Scalar squaredNorm(const Image& a) { return (a * a).sum(); }

void requireFinite(const Image& u, const char* what);
void requireShape(const Image& u, Shape2 s, const char* what);

}  // namespace specfuse

#endif
