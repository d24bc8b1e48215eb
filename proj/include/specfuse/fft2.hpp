#ifndef SPECFUSE_FFT2_HPP
#define SPECFUSE_FFT2_HPP

#include "specfuse/core.hpp"

namespace specfuse {

// 2-D DFT built from 1-D transforms along rows and columns. Stateless apart
// from per-thread plan caches, so a single instance can be shared across
// threads.
class Fft2 {
 public:
  explicit Fft2(Shape2 shape) : shape_(shape) {}

  Shape2 shape() const { return shape_; }

  ComplexImage fwd(const Image& x) const;
  // Inverse transform (with 1/(m1*m2) scaling); returns the real part.
  Image inv(const ComplexImage& x) const;

 private:
  Shape2 shape_;
};

}  // namespace specfuse

#endif
