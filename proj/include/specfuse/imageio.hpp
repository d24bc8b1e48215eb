#ifndef SPECFUSE_IMAGEIO_HPP
#define SPECFUSE_IMAGEIO_HPP

#include "specfuse/core.hpp"

#include <cstdint>
#include <string>

namespace specfuse {

enum class RasterFormat { Png8, Png16, MatrixText };

struct ValueScale {
  Scalar min = 0;
  Scalar max = 1;
};

// Grayscale image file I/O. PNG stores integers mapped linearly through the
// value scale and always gets a JSON sidecar `<path>.meta` so the float
// values can be reconstructed; matrixText is lossless decimal text, one row
// per line.
void writeImage(const std::string& path, const Image& u, RasterFormat format,
                ValueScale scale = {});
Image readImage(const std::string& path);

// Three-channel read; grayscale files replicate into all channels.
Rgb readRgb(const std::string& path);

using ByteImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RasterRgb8 {
  ByteImage r, g, b;
};

enum class Colormap { Parula, Gray };

// Clamps to [0,1] and maps through a fixed 256-entry lookup table.
RasterRgb8 renderImage(const Image& u, Colormap colormap);

// Grayscale kernel view (min -> black, max -> white) with a red hair cross on
// the center tap and a green one on the rounded centroid; overlapping cross
// pixels come out yellow.
RasterRgb8 renderKernel(const Kernel& k);

void writePngRgb8(const std::string& path, const RasterRgb8& raster);

}  // namespace specfuse

#endif
