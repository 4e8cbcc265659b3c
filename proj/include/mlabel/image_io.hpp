#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlabel/grid.hpp"
#include "mlabel/pipeline.hpp"

namespace mlabel {

// 8-bit raster image with values scaled to [0,1]; rows are raster order, which
// matches Grid({height, width}) pixel indexing.
struct Image {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd values;  // n x channels

  int channels() const { return static_cast<int>(values.cols()); }
  Grid grid() const { return Grid({height, width}); }
};

namespace detail {

inline int pnm_next_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comment lines between header tokens.
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) throw std::runtime_error("malformed PNM header in " + path);
  return value;
}

}  // namespace detail

inline Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image file: " + path);
  std::string magic;
  in >> magic;
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw std::runtime_error("unsupported PNM magic '" + magic + "' in " + path +
                             " (binary P5/P6 only)");
  const int width = detail::pnm_next_int(in, path);
  const int height = detail::pnm_next_int(in, path);
  const int maxval = detail::pnm_next_int(in, path);
  if (maxval != 255) throw std::runtime_error("only 8-bit PNM supported: " + path);
  in.get();  // single whitespace before raster

  const size_t count = static_cast<size_t>(width) * height * channels;
  std::vector<std::uint8_t> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<size_t>(in.gcount()) != count)
    throw std::runtime_error("truncated PNM raster in " + path);

  Image img;
  img.width = width;
  img.height = height;
  img.values.resize(static_cast<int>(width) * height, channels);
  for (int p = 0; p < img.values.rows(); ++p)
    for (int c = 0; c < channels; ++c)
      img.values(p, c) = raw[static_cast<size_t>(p) * channels + c] / 255.0;
  return img;
}

inline void write_pnm(const std::string& path, const Image& img) {
  const int channels = img.channels();
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("write_pnm: only 1 or 3 channels supported");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image file: " + path);
  out << (channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> raw(static_cast<size_t>(img.values.rows()) * channels);
  for (int p = 0; p < img.values.rows(); ++p)
    for (int c = 0; c < channels; ++c) {
      const double v = std::clamp(img.values(p, c), 0.0, 1.0);
      raw[static_cast<size_t>(p) * channels + c] =
          static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("failed writing image file: " + path);
}

inline Image channel_image(const Grid& grid, const Eigen::VectorXd& values) {
  if (grid.dim() != 2) throw std::invalid_argument("channel_image: need a 2D grid");
  Image img;
  img.height = grid.dims[0];
  img.width = grid.dims[1];
  img.values = values;
  return img;
}

// Label map as PGM with the l levels spread over [0,255].
inline void write_label_pgm(const std::string& path, const DiscreteLabeling& lab, int l) {
  if (lab.grid.dim() != 2) throw std::invalid_argument("write_label_pgm: need a 2D grid");
  Eigen::VectorXd levels(lab.grid.size());
  for (int p = 0; p < lab.grid.size(); ++p)
    levels(p) = l < 2 ? 0.0 : static_cast<double>(lab.labels[p] - 1) / (l - 1);
  write_pnm(path, channel_image(lab.grid, levels));
}

}  // namespace mlabel
