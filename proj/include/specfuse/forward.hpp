#ifndef SPECFUSE_FORWARD_HPP
#define SPECFUSE_FORWARD_HPP

#include "specfuse/core.hpp"
#include "specfuse/fft2.hpp"

namespace specfuse {

// Frequency-domain workspace for one geometry. The image-sized transform is
// set up once; kernel spectra are recomputed whenever the kernel changes.
struct ForwardPlan {
  ProblemGeometry geometry;
  Fft2 fft;

  explicit ForwardPlan(const ProblemGeometry& g) : geometry(g), fft(g.imageShape) {}

  ComplexImage kernelSpectrum(const Kernel& k) const;
  ComplexImage imageSpectrum(const Image& u) const;
};

// Zero-padded embedding J: the kernel's center tap lands on the lattice
// origin with cyclic wrap, so a Dirac kernel convolves as the identity.
Image embedKernel(const Kernel& k, const ProblemGeometry& geometry);

// Restriction J^T: reads the kernel window back out of an image-sized array.
Kernel restrictKernel(const Image& w, const ProblemGeometry& geometry);

// Cyclic convolution C_k u computed through the DFT.
Image convolve(const Image& u, const Kernel& k, const ForwardPlan& plan);
Image convolve(const Image& u, const ComplexImage& kernelSpec, const ForwardPlan& plan);

// Margin deletion B: keeps the central m - 2l block.
Image clipBoundary(const Image& u, const ProblemGeometry& geometry);

// Block-average sampling S over s x s cells.
Image sample(const Image& u, int s);

// A_k u = S(B(C_k u)).
Image applyA(const Image& u, const Kernel& k, const ForwardPlan& plan);
Image applyA(const Image& u, const ComplexImage& kernelSpec, const ForwardPlan& plan);

// Kernel-side evaluation A_u(Jk); equals applyA(u, k) by convolution symmetry.
Image applyAOnKernel(const Kernel& k, const Image& u, const ForwardPlan& plan);
Image applyAOnKernel(const Kernel& k, const ComplexImage& imageSpec, const ForwardPlan& plan);

// Adjoints: <A_k u, y> = <u, adjointAImage(y, k)> and
// <A_u Jk, y> = <k, adjointAKernel(y, u)>.
Image adjointAImage(const Image& y, const Kernel& k, const ForwardPlan& plan);
Image adjointAImage(const Image& y, const ComplexImage& kernelSpec, const ForwardPlan& plan);
Kernel adjointAKernel(const Image& y, const Image& u, const ForwardPlan& plan);
Kernel adjointAKernel(const Image& y, const ComplexImage& imageSpec, const ForwardPlan& plan);

// Right inverse H of S∘B: block replication inside, edge replication on the
// margin. (S∘B)(upsampleInit(f)) == f.
Image upsampleInit(const Image& f, const ProblemGeometry& geometry);

}  // namespace specfuse

#endif
