#ifndef SPECFUSE_SYNTH_HPP
#define SPECFUSE_SYNTH_HPP

#include "specfuse/core.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace specfuse {

// Recipe for a simulated fusion problem. Data are produced with replicated
// (not periodic) boundary conditions so the solver's forward model never
// generated them.
struct SynthSpec {
  enum class KernelKind { Disk, OffCenterGaussian, Dirac, Custom };

  KernelKind kernelKind = KernelKind::Disk;
  Shape2 kernelShape{41, 41};
  int samplingFactor = 4;
  Scalar noiseVariance = 0.001;
  std::array<Index, 2> sideInfoShift{0, 0};
  std::uint64_t randomSeed = 0;

  Scalar diskRadius = -1;     // < 0 picks min(kernel side)/6
  Scalar gaussianSigma = -1;  // < 0 picks min(kernel side)/8
  std::array<Scalar, 2> gaussianOffset{5, 5};
  Kernel customKernel;
};

struct Problem {
  Image f;           // scaled data, shape n
  Image sideInfo;    // shifted grayscale guide, shape m
  Image truthImage;  // red channel crop, shape m, original units
  Kernel truthKernel;
  ProblemGeometry geometry;
  Scalar scaleMin = 0;  // f = (raw - scaleMin) / (scaleMax - scaleMin)
  Scalar scaleMax = 1;
  SynthSpec spec;
};

Kernel makeDiskKernel(Shape2 shape, Scalar radius);
Kernel makeOffCenterGaussian(Shape2 shape, Scalar sigma, std::array<Scalar, 2> offset);

// Forward model with edge-replicated convolution, margin clipping and block
// sampling; matches the periodic path deep in the interior only.
Image forwardReplicated(const Image& u, const Kernel& k, int samplingFactor);

Image addGaussianNoise(const Image& f, Scalar variance, std::uint64_t seed);

// Derives the largest geometry fitting the source image (center crop).
Problem makeProblem(const Rgb& groundTruth, const SynthSpec& spec);

// Deterministic textured RGB test scene: shared geometry across channels,
// channel-specific intensities.
Rgb makeTestImage(Shape2 shape, std::uint64_t seed);

void writeProblemBundle(const std::string& dir, const Problem& p);
Problem readProblemBundle(const std::string& dir);

}  // namespace specfuse

#endif
