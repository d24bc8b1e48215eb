#include "specfuse/imageio.hpp"

#include "specfuse/metrics.hpp"
#include "specfuse/regularizers.hpp"

#include <png.h>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace specfuse {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void writeMeta(const std::string& path, const Image& u, RasterFormat format, ValueScale scale) {
  nlohmann::json meta;
  meta["shape"] = {u.rows(), u.cols()};
  meta["value_scale"] = {scale.min, scale.max};
  meta["format"] = format == RasterFormat::Png8 ? "png8" : "png16";
  meta["writer"] = "specfuse";
  std::ofstream out(path + ".meta");
  if (!out) throw Error("cannot write meta sidecar: " + path + ".meta");
  out << meta.dump(2) << "\n";
}

ValueScale readMetaScale(const std::string& path) {
  std::ifstream in(path + ".meta");
  if (!in) return {};
  nlohmann::json meta;
  try {
    in >> meta;
    return {meta.at("value_scale").at(0).get<Scalar>(),
            meta.at("value_scale").at(1).get<Scalar>()};
  } catch (const std::exception&) {
    throw CorruptFile("unreadable meta sidecar: " + path + ".meta");
  }
}

void writeMatrixText(const std::string& path, const Image& u) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  char buf[64];
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", u(i, j));
      out << buf << (j + 1 < u.cols() ? " " : "");
    }
    out << "\n";
  }
}

Image readMatrixText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<Scalar> row;
    Scalar v;
    while (ss >> v) row.push_back(v);
    if (!ss.eof()) throw CorruptFile("bad number in " + path);
    if (!rows.empty() && row.size() != rows.front().size())
      throw CorruptFile("ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CorruptFile("empty matrix file: " + path);
  Image u(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < u.cols(); ++j) u(i, j) = rows[size_t(i)][size_t(j)];
  return u;
}

bool hasPngMagic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

void writePngGray(const std::string& path, const Image& u, int bitDepth, ValueScale scale) {
  if (!(scale.max > scale.min)) throw BadParams("writeImage: value scale must have max > min");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng failure writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, png_uint_32(u.cols()), png_uint_32(u.rows()), bitDepth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const Scalar top = bitDepth == 16 ? 65535.0 : 255.0;
  const Scalar span = scale.max - scale.min;
  if (bitDepth == 16) {
    std::vector<std::uint16_t> row(size_t(u.cols()));
    png_set_swap(png);  // libpng wants big-endian 16-bit samples
    for (Index i = 0; i < u.rows(); ++i) {
      for (Index j = 0; j < u.cols(); ++j) {
        const Scalar t = std::clamp((u(i, j) - scale.min) / span, Scalar(0), Scalar(1));
        row[size_t(j)] = std::uint16_t(std::lround(t * top));
      }
      png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
    }
  } else {
    std::vector<std::uint8_t> row(size_t(u.cols()));
    for (Index i = 0; i < u.rows(); ++i) {
      for (Index j = 0; j < u.cols(); ++j) {
        const Scalar t = std::clamp((u(i, j) - scale.min) / span, Scalar(0), Scalar(1));
        row[size_t(j)] = std::uint8_t(std::lround(t * top));
      }
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

struct PngPixels {
  Index rows = 0, cols = 0;
  int channels = 1;  // 1 gray, 3 rgb
  std::vector<Scalar> data;  // row-major, interleaved, already in [0,1]
};

PngPixels readPngPixels(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptFile("libpng failure reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const int colorType = png_get_color_type(png, info);
  int bitDepth = png_get_bit_depth(png, info);
  if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (bitDepth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  bitDepth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3)
    throw UnsupportedFormat("unsupported channel count in " + path);

  PngPixels px;
  px.rows = Index(png_get_image_height(png, info));
  px.cols = Index(png_get_image_width(png, info));
  px.channels = channels;
  px.data.resize(size_t(px.rows * px.cols * channels));

  const Scalar top = bitDepth == 16 ? 65535.0 : 255.0;
  std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
  for (Index i = 0; i < px.rows; ++i) {
    png_read_row(png, row.data(), nullptr);
    for (Index j = 0; j < px.cols * channels; ++j) {
      Scalar v;
      if (bitDepth == 16)
        v = Scalar(reinterpret_cast<const std::uint16_t*>(row.data())[j]);
      else
        v = Scalar(row[size_t(j)]);
      px.data[size_t(i * px.cols * channels + j)] = v / top;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return px;
}

bool endsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void writeImage(const std::string& path, const Image& u, RasterFormat format, ValueScale scale) {
  requireFinite(u, "writeImage");
  switch (format) {
    case RasterFormat::MatrixText:
      writeMatrixText(path, u);
      return;
    case RasterFormat::Png8:
      writePngGray(path, u, 8, scale);
      writeMeta(path, u, format, scale);
      return;
    case RasterFormat::Png16:
      writePngGray(path, u, 16, scale);
      writeMeta(path, u, format, scale);
      return;
  }
  throw UnsupportedFormat("writeImage: unknown format");
}

Image readImage(const std::string& path) {
  if (endsWith(path, ".txt")) return readMatrixText(path);
  if (hasPngMagic(path)) {
    const PngPixels px = readPngPixels(path);
    const ValueScale scale = readMetaScale(path);
    if (px.channels == 3) {
      Rgb rgb;
      rgb.r.resize(px.rows, px.cols);
      rgb.g.resize(px.rows, px.cols);
      rgb.b.resize(px.rows, px.cols);
      for (Index i = 0; i < px.rows; ++i)
        for (Index j = 0; j < px.cols; ++j) {
          rgb.r(i, j) = px.data[size_t((i * px.cols + j) * 3 + 0)];
          rgb.g(i, j) = px.data[size_t((i * px.cols + j) * 3 + 1)];
          rgb.b(i, j) = px.data[size_t((i * px.cols + j) * 3 + 2)];
        }
      return grayscale(rgb);
    }
    Image u(px.rows, px.cols);
    for (Index i = 0; i < px.rows; ++i)
      for (Index j = 0; j < px.cols; ++j)
        u(i, j) = scale.min + px.data[size_t(i * px.cols + j)] * (scale.max - scale.min);
    return u;
  }
  if (endsWith(path, ".png")) throw CorruptFile("not a PNG file: " + path);
  return readMatrixText(path);
}

Rgb readRgb(const std::string& path) {
  if (endsWith(path, ".txt")) {
    const Image u = readMatrixText(path);
    return {u, u, u};
  }
  if (!hasPngMagic(path)) throw UnsupportedFormat("readRgb: expected a PNG file: " + path);
  const PngPixels px = readPngPixels(path);
  Rgb rgb;
  rgb.r.resize(px.rows, px.cols);
  rgb.g.resize(px.rows, px.cols);
  rgb.b.resize(px.rows, px.cols);
  for (Index i = 0; i < px.rows; ++i)
    for (Index j = 0; j < px.cols; ++j) {
      if (px.channels == 3) {
        rgb.r(i, j) = px.data[size_t((i * px.cols + j) * 3 + 0)];
        rgb.g(i, j) = px.data[size_t((i * px.cols + j) * 3 + 1)];
        rgb.b(i, j) = px.data[size_t((i * px.cols + j) * 3 + 2)];
      } else {
        rgb.r(i, j) = rgb.g(i, j) = rgb.b(i, j) = px.data[size_t(i * px.cols + j)];
      }
    }
  return rgb;
}

namespace {

// Piecewise-linear expansion of a parula-like anchor set; exact equality with
// any proprietary colormap is not claimed.
const std::array<std::array<Scalar, 3>, 11> kParulaAnchors = {{
    {0.2422, 0.1504, 0.6603},
    {0.2803, 0.2782, 0.9221},
    {0.2440, 0.4358, 0.9988},
    {0.1085, 0.5901, 0.9196},
    {0.0232, 0.6912, 0.8208},
    {0.1959, 0.7558, 0.6697},
    {0.4558, 0.7800, 0.4614},
    {0.6843, 0.7667, 0.2905},
    {0.8751, 0.7386, 0.1783},
    {0.9856, 0.7553, 0.1469},
    {0.9769, 0.9839, 0.0805},
}};

struct Lut {
  std::uint8_t r[256], g[256], b[256];
};

const Lut& parulaLut() {
  static const Lut lut = [] {
    Lut t;
    for (int i = 0; i < 256; ++i) {
      const Scalar pos = Scalar(i) / 255 * (kParulaAnchors.size() - 1);
      const int lo = std::min<int>(int(pos), int(kParulaAnchors.size()) - 2);
      const Scalar w = pos - lo;
      for (int c = 0; c < 3; ++c) {
        const Scalar v = (1 - w) * kParulaAnchors[size_t(lo)][size_t(c)] +
                         w * kParulaAnchors[size_t(lo) + 1][size_t(c)];
        const auto byte = std::uint8_t(std::lround(std::clamp(v, Scalar(0), Scalar(1)) * 255));
        if (c == 0) t.r[i] = byte;
        if (c == 1) t.g[i] = byte;
        if (c == 2) t.b[i] = byte;
      }
    }
    return t;
  }();
  return lut;
}

}  // namespace

RasterRgb8 renderImage(const Image& u, Colormap colormap) {
  requireFinite(u, "renderImage");
  RasterRgb8 out;
  out.r.resize(u.rows(), u.cols());
  out.g.resize(u.rows(), u.cols());
  out.b.resize(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < u.cols(); ++j) {
      const Scalar t = std::clamp(u(i, j), Scalar(0), Scalar(1));
      const int idx = int(std::lround(t * 255));
      if (colormap == Colormap::Parula) {
        const Lut& lut = parulaLut();
        out.r(i, j) = lut.r[idx];
        out.g(i, j) = lut.g[idx];
        out.b(i, j) = lut.b[idx];
      } else {
        out.r(i, j) = out.g(i, j) = out.b(i, j) = std::uint8_t(idx);
      }
    }
  return out;
}

RasterRgb8 renderKernel(const Kernel& k) {
  const auto centroid = kernelCentroid(k);  // throws NotNormalized when unnormalized
  const Index redRow = (k.rows() - 1) / 2, redCol = (k.cols() - 1) / 2;
  const Index greenRow =
      std::clamp<Index>(Index(std::lround(centroid.first)) - 1, 0, k.rows() - 1);
  const Index greenCol =
      std::clamp<Index>(Index(std::lround(centroid.second)) - 1, 0, k.cols() - 1);

  const Scalar lo = k.minCoeff(), hi = k.maxCoeff();
  RasterRgb8 out;
  out.r.resize(k.rows(), k.cols());
  out.g.resize(k.rows(), k.cols());
  out.b.resize(k.rows(), k.cols());
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = 0; j < k.cols(); ++j) {
      const bool inRed = i == redRow || j == redCol;
      const bool inGreen = i == greenRow || j == greenCol;
      if (inRed || inGreen) {
        out.r(i, j) = inRed ? 255 : 0;
        out.g(i, j) = inGreen ? 255 : 0;
        out.b(i, j) = 0;
      } else {
        const Scalar t = hi > lo ? (k(i, j) - lo) / (hi - lo) : Scalar(0.5);
        const auto byte = std::uint8_t(std::lround(t * 255));
        out.r(i, j) = out.g(i, j) = out.b(i, j) = byte;
      }
    }
  return out;
}

void writePngRgb8(const std::string& path, const RasterRgb8& raster) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng failure writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, png_uint_32(raster.r.cols()), png_uint_32(raster.r.rows()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(size_t(raster.r.cols()) * 3);
  for (Index i = 0; i < raster.r.rows(); ++i) {
    for (Index j = 0; j < raster.r.cols(); ++j) {
      row[size_t(j) * 3 + 0] = raster.r(i, j);
      row[size_t(j) * 3 + 1] = raster.g(i, j);
      row[size_t(j) * 3 + 2] = raster.b(i, j);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

}  // namespace specfuse
