#include "specfuse/synth.hpp"

#include "specfuse/imageio.hpp"
#include "specfuse/regularizers.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace specfuse {

namespace {

void requireOdd(Shape2 shape, const char* what) {
  if (shape.rows % 2 == 0 || shape.cols % 2 == 0)
    throw EvenKernel(std::string(what) + ": kernel sides must be odd");
}

Index clampIndex(Index i, Index n) { return std::clamp<Index>(i, 0, n - 1); }

}  // namespace

Kernel makeDiskKernel(Shape2 shape, Scalar radius) {
  requireOdd(shape, "makeDiskKernel");
  if (!(radius > 0)) throw BadParams("makeDiskKernel: radius must be > 0");
  const Index l1 = (shape.rows - 1) / 2, l2 = (shape.cols - 1) / 2;
  if (radius > Scalar(std::min(l1, l2)) && std::min(l1, l2) > 0)
    throw RadiusTooLarge("makeDiskKernel: radius exceeds the kernel margin");
  if (std::min(l1, l2) == 0 && radius >= 1)
    throw RadiusTooLarge("makeDiskKernel: radius exceeds the kernel margin");
  Kernel k = Kernel::Zero(shape.rows, shape.cols);
  for (Index a = 0; a < shape.rows; ++a)
    for (Index b = 0; b < shape.cols; ++b) {
      const Scalar d = std::hypot(Scalar(a - l1), Scalar(b - l2));
      if (d <= radius) k(a, b) = 1;
    }
  return k / k.sum();
}

Kernel makeOffCenterGaussian(Shape2 shape, Scalar sigma, std::array<Scalar, 2> offset) {
  requireOdd(shape, "makeOffCenterGaussian");
  if (!(sigma > 0)) throw BadParams("makeOffCenterGaussian: sigma must be > 0");
  const Index l1 = (shape.rows - 1) / 2, l2 = (shape.cols - 1) / 2;
  if (std::abs(offset[0]) > Scalar(l1) || std::abs(offset[1]) > Scalar(l2))
    throw OffsetOutOfWindow("makeOffCenterGaussian: center offset leaves the kernel window");
  const Scalar c1 = Scalar(l1) + offset[0], c2 = Scalar(l2) + offset[1];
  Kernel k(shape.rows, shape.cols);
  for (Index a = 0; a < shape.rows; ++a)
    for (Index b = 0; b < shape.cols; ++b) {
      const Scalar d2 = (Scalar(a) - c1) * (Scalar(a) - c1) + (Scalar(b) - c2) * (Scalar(b) - c2);
      k(a, b) = std::exp(-d2 / (2 * sigma * sigma));
    }
  return k / k.sum();
}

Image forwardReplicated(const Image& u, const Kernel& k, int samplingFactor) {
  requireFinite(u, "forwardReplicated");
  requireOdd(shapeOf(k), "forwardReplicated");
  if (samplingFactor < 1) throw BadFactor("forwardReplicated: sampling factor must be >= 1");
  const Index m1 = u.rows(), m2 = u.cols();
  const Index l1 = (k.rows() - 1) / 2, l2 = (k.cols() - 1) / 2;
  const Index c1 = m1 - 2 * l1, c2 = m2 - 2 * l2;
  if (c1 < 1 || c2 < 1) throw ShapeMismatch("forwardReplicated: kernel too large for image");
  if (c1 % samplingFactor != 0 || c2 % samplingFactor != 0)
    throw NotDivisible("forwardReplicated: clipped image not divisible by sampling factor");

  // The observed scene is the meaningful part only; its edges are replicated
  // instead of reading the model image's margin, so border data pixels are
  // not reproducible by the periodic forward operator.
  const Image scene = u.block(l1, l2, c1, c2);
  Image conv(c1, c2);
  for (Index i = 0; i < c1; ++i)
    for (Index j = 0; j < c2; ++j) {
      Scalar acc = 0;
      for (Index a = 0; a < k.rows(); ++a) {
        const Index ii = clampIndex(i - (a - l1), c1);
        for (Index b = 0; b < k.cols(); ++b)
          acc += k(a, b) * scene(ii, clampIndex(j - (b - l2), c2));
      }
      conv(i, j) = acc;
    }

  const int s = samplingFactor;
  if (s == 1) return conv;
  const Scalar w = Scalar(1) / (Scalar(s) * Scalar(s));
  Image out(c1 / s, c2 / s);
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = conv.block(i * s, j * s, s, s).sum() * w;
  return out;
}

Image addGaussianNoise(const Image& f, Scalar variance, std::uint64_t seed) {
  requireFinite(f, "addGaussianNoise");
  if (variance < 0) throw BadParams("addGaussianNoise: variance must be >= 0");
  if (variance == 0) return f;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> noise(0, std::sqrt(variance));
  Image out = f;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += noise(rng);
  return out;
}

namespace {

Kernel kernelFromSpec(const SynthSpec& spec) {
  const Scalar minSide = Scalar(std::min(spec.kernelShape.rows, spec.kernelShape.cols));
  switch (spec.kernelKind) {
    case SynthSpec::KernelKind::Disk: {
      const Scalar radius = spec.diskRadius > 0 ? spec.diskRadius : minSide / 6;
      return makeDiskKernel(spec.kernelShape, radius);
    }
    case SynthSpec::KernelKind::OffCenterGaussian: {
      const Scalar sigma = spec.gaussianSigma > 0 ? spec.gaussianSigma : minSide / 8;
      return makeOffCenterGaussian(spec.kernelShape, sigma, spec.gaussianOffset);
    }
    case SynthSpec::KernelKind::Dirac: {
      requireOdd(spec.kernelShape, "makeProblem");
      Kernel k = Kernel::Zero(spec.kernelShape.rows, spec.kernelShape.cols);
      k((spec.kernelShape.rows - 1) / 2, (spec.kernelShape.cols - 1) / 2) = 1;
      return k;
    }
    case SynthSpec::KernelKind::Custom: {
      requireOdd(shapeOf(spec.customKernel), "makeProblem");
      if (spec.customKernel.size() == 0) throw BadParams("makeProblem: empty custom kernel");
      return spec.customKernel;
    }
  }
  throw BadParams("makeProblem: unknown kernel kind");
}

}  // namespace

Problem makeProblem(const Rgb& groundTruth, const SynthSpec& spec) {
  const Kernel kernel = kernelFromSpec(spec);
  const Index M1 = groundTruth.r.rows(), M2 = groundTruth.r.cols();
  const Index l1 = (kernel.rows() - 1) / 2, l2 = (kernel.cols() - 1) / 2;
  const int s = spec.samplingFactor;
  if (s < 1) throw BadFactor("makeProblem: sampling factor must be >= 1");

  const Index n1 = (M1 - 2 * l1) / s, n2 = (M2 - 2 * l2) / s;
  if (n1 < 1 || n2 < 1)
    throw ImageTooSmall("makeProblem: source image cannot host the requested geometry");

  Problem p;
  p.spec = spec;
  p.spec.customKernel = kernel;
  p.geometry = geometryFrom({n1, n2}, shapeOf(kernel), s);
  p.truthKernel = kernel;

  const Index m1 = p.geometry.imageShape.rows, m2 = p.geometry.imageShape.cols;
  const Index o1 = (M1 - m1) / 2, o2 = (M2 - m2) / 2;
  p.truthImage = groundTruth.r.block(o1, o2, m1, m2);

  const Image clean = forwardReplicated(p.truthImage, kernel, s);
  Image noisy = addGaussianNoise(clean, spec.noiseVariance, spec.randomSeed);
  const Scalar lo = noisy.minCoeff(), hi = noisy.maxCoeff();
  if (hi > lo) {
    p.scaleMin = lo;
    p.scaleMax = hi;
    p.f = (noisy - lo) / (hi - lo);
  } else {
    p.scaleMin = 0;
    p.scaleMax = 1;
    p.f = std::move(noisy);
  }

  const Image gray = grayscale(groundTruth);
  p.sideInfo.resize(m1, m2);
  const Index t1 = spec.sideInfoShift[0], t2 = spec.sideInfoShift[1];
  for (Index i = 0; i < m1; ++i) {
    const Index si = clampIndex(o1 + i + t1, M1);
    for (Index j = 0; j < m2; ++j) p.sideInfo(i, j) = gray(si, clampIndex(o2 + j + t2, M2));
  }
  return p;
}

Rgb makeTestImage(Shape2 shape, std::uint64_t seed) {
  if (shape.rows < 8 || shape.cols < 8) throw ImageTooSmall("makeTestImage: need at least 8x8");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> unit(0, 1);

  const Index m1 = shape.rows, m2 = shape.cols;
  auto normalized = [](Image x) {
    const Scalar lo = x.minCoeff(), hi = x.maxCoeff();
    return hi > lo ? Image((x - lo) / (hi - lo)) : Image(Image::Zero(x.rows(), x.cols()));
  };

  // cartoon layer: overlapping rectangles and disks with sharp edges
  Image cartoon = Image::Zero(m1, m2);
  for (int t = 0; t < 14; ++t) {
    const Index r0 = Index(unit(rng) * Scalar(m1 - 2));
    const Index c0 = Index(unit(rng) * Scalar(m2 - 2));
    const Index h = 2 + Index(unit(rng) * Scalar(m1) / 3);
    const Index w = 2 + Index(unit(rng) * Scalar(m2) / 3);
    const Scalar amp = 2 * unit(rng) - 1;
    cartoon.block(r0, c0, std::min(h, m1 - r0), std::min(w, m2 - c0)) += amp;
  }
  for (int t = 0; t < 10; ++t) {
    const Scalar cy = unit(rng) * Scalar(m1 - 1), cx = unit(rng) * Scalar(m2 - 1);
    const Scalar rad = 2 + unit(rng) * Scalar(std::min(m1, m2)) / 6;
    const Scalar amp = 2 * unit(rng) - 1;
    for (Index i = 0; i < m1; ++i)
      for (Index j = 0; j < m2; ++j)
        if (std::hypot(Scalar(i) - cy, Scalar(j) - cx) <= rad) cartoon(i, j) += amp;
  }
  cartoon = normalized(std::move(cartoon));

  // smooth layer: Gaussian bumps
  Image smooth = Image::Zero(m1, m2);
  for (int t = 0; t < 12; ++t) {
    const Scalar cy = unit(rng) * Scalar(m1 - 1), cx = unit(rng) * Scalar(m2 - 1);
    const Scalar sg = 2 + unit(rng) * Scalar(std::min(m1, m2)) / 5;
    const Scalar amp = 2 * unit(rng) - 1;
    for (Index i = 0; i < m1; ++i)
      for (Index j = 0; j < m2; ++j) {
        const Scalar d2 = (Scalar(i) - cy) * (Scalar(i) - cy) + (Scalar(j) - cx) * (Scalar(j) - cx);
        smooth(i, j) += amp * std::exp(-d2 / (2 * sg * sg));
      }
  }
  smooth = normalized(std::move(smooth));

  // fine texture: two oriented ripples plus scattered small bumps
  Image ripple = Image::Zero(m1, m2);
  for (int t = 0; t < 2; ++t) {
    const Scalar w1 = 0.8 + unit(rng), w2 = 0.8 + unit(rng), phi = 6.28 * unit(rng);
    for (Index i = 0; i < m1; ++i)
      for (Index j = 0; j < m2; ++j)
        ripple(i, j) += std::sin(w1 * Scalar(i) + phi) * std::cos(w2 * Scalar(j));
  }
  for (int t = 0; t < 40; ++t) {
    const Index cy = Index(unit(rng) * Scalar(m1 - 2)), cx = Index(unit(rng) * Scalar(m2 - 2));
    const Scalar amp = 2 * unit(rng) - 1;
    ripple.block(cy, cx, std::min<Index>(2, m1 - cy), std::min<Index>(2, m2 - cx)) += amp;
  }
  ripple = normalized(std::move(ripple));

  Rgb rgb;
  rgb.r = normalized(0.45 * cartoon + 0.20 * smooth + 0.35 * ripple);
  rgb.g = normalized(0.25 * cartoon + 0.45 * smooth + 0.30 * ripple);
  rgb.b = normalized(0.40 * cartoon + 0.15 * smooth + 0.45 * ripple);
  return rgb;
}

namespace {

std::string kindName(SynthSpec::KernelKind kind) {
  switch (kind) {
    case SynthSpec::KernelKind::Disk: return "disk";
    case SynthSpec::KernelKind::OffCenterGaussian: return "gaussian";
    case SynthSpec::KernelKind::Dirac: return "dirac";
    case SynthSpec::KernelKind::Custom: return "custom";
  }
  return "custom";
}

SynthSpec::KernelKind kindFromName(const std::string& name) {
  if (name == "disk") return SynthSpec::KernelKind::Disk;
  if (name == "gaussian") return SynthSpec::KernelKind::OffCenterGaussian;
  if (name == "dirac") return SynthSpec::KernelKind::Dirac;
  if (name == "custom") return SynthSpec::KernelKind::Custom;
  throw CorruptFile("unknown kernel kind in bundle meta: " + name);
}

}  // namespace

void writeProblemBundle(const std::string& dir, const Problem& p) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  writeImage(dir + "/f.txt", p.f, RasterFormat::MatrixText);
  writeImage(dir + "/v.txt", p.sideInfo, RasterFormat::MatrixText);
  writeImage(dir + "/truth_image.txt", p.truthImage, RasterFormat::MatrixText);
  writeImage(dir + "/truth_kernel.txt", p.truthKernel, RasterFormat::MatrixText);

  nlohmann::json meta;
  meta["kernel_kind"] = kindName(p.spec.kernelKind);
  meta["kernel_shape"] = {p.geometry.kernelShape.rows, p.geometry.kernelShape.cols};
  meta["sampling_factor"] = p.geometry.samplingFactor;
  meta["noise_variance"] = p.spec.noiseVariance;
  meta["side_info_shift"] = {p.spec.sideInfoShift[0], p.spec.sideInfoShift[1]};
  meta["random_seed"] = p.spec.randomSeed;
  meta["scale_min"] = p.scaleMin;
  meta["scale_max"] = p.scaleMax;
  meta["data_shape"] = {p.geometry.dataShape.rows, p.geometry.dataShape.cols};
  meta["image_shape"] = {p.geometry.imageShape.rows, p.geometry.imageShape.cols};
  std::ofstream out(dir + "/bundle.meta");
  if (!out) throw Error("cannot write bundle meta in " + dir);
  out << meta.dump(2) << "\n";
}

Problem readProblemBundle(const std::string& dir) {
  Problem p;
  p.f = readImage(dir + "/f.txt");
  p.sideInfo = readImage(dir + "/v.txt");
  p.truthImage = readImage(dir + "/truth_image.txt");
  p.truthKernel = readImage(dir + "/truth_kernel.txt");

  std::ifstream in(dir + "/bundle.meta");
  if (!in) throw Error("cannot read bundle meta in " + dir);
  nlohmann::json meta;
  try {
    in >> meta;
    p.spec.kernelKind = kindFromName(meta.at("kernel_kind").get<std::string>());
    p.spec.kernelShape = {meta.at("kernel_shape").at(0).get<Index>(),
                          meta.at("kernel_shape").at(1).get<Index>()};
    p.spec.samplingFactor = meta.at("sampling_factor").get<int>();
    p.spec.noiseVariance = meta.at("noise_variance").get<Scalar>();
    p.spec.sideInfoShift = {meta.at("side_info_shift").at(0).get<Index>(),
                            meta.at("side_info_shift").at(1).get<Index>()};
    p.spec.randomSeed = meta.at("random_seed").get<std::uint64_t>();
    p.scaleMin = meta.at("scale_min").get<Scalar>();
    p.scaleMax = meta.at("scale_max").get<Scalar>();
  } catch (const nlohmann::json::exception&) {
    throw CorruptFile("bad bundle meta in " + dir);
  }
  p.spec.customKernel = p.truthKernel;
  p.geometry =
      geometryFrom(shapeOf(p.f), p.spec.kernelShape, p.spec.samplingFactor);
  requireShape(p.sideInfo, p.geometry.imageShape, "bundle side info");
  return p;
}

}  // namespace specfuse
