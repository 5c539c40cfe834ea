#pragma once

// Dataset ingestion (IDX, CSV), PPM/PGM rasters, the HSV hue-band
// segmentation pipeline, and a synthetic colored-shape generator.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "hmlelm/numerics.hpp"

namespace hml {

struct LabeledDataset {
  Matrix X;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<int> streams;  // optional grouping of rows into capture streams

  int n_classes() const {
    int hi = static_cast<int>(class_names.size());
    for (int l : labels) hi = std::max(hi, l + 1);
    return hi;
  }
};

// ---------------------------------------------------------------- files

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes to a sibling temporary and renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    require(static_cast<bool>(out), ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

// ---------------------------------------------------------------- IDX

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace detail {

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

inline void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace detail

struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};

inline IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 16, ErrorKind::kDataFormat, "idx images: truncated header");
  require(detail::read_be32(bytes, 0) == kIdxImagesMagic, ErrorKind::kDataFormat, "idx images: bad magic");
  IdxImages img;
  img.count = detail::read_be32(bytes, 4);
  img.rows = detail::read_be32(bytes, 8);
  img.cols = detail::read_be32(bytes, 12);
  const std::size_t need = std::size_t{img.count} * img.rows * img.cols;
  require(bytes.size() - 16 >= need, ErrorKind::kDataFormat, "idx images: truncated payload");
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return img;
}

inline std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 8, ErrorKind::kDataFormat, "idx labels: truncated header");
  require(detail::read_be32(bytes, 0) == kIdxLabelsMagic, ErrorKind::kDataFormat, "idx labels: bad magic");
  const std::size_t n = detail::read_be32(bytes, 4);
  require(bytes.size() - 8 >= n, ErrorKind::kDataFormat, "idx labels: truncated payload");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

inline std::vector<std::uint8_t> encode_idx_images(const IdxImages& img) {
  std::vector<std::uint8_t> b;
  b.reserve(16 + img.pixels.size());
  detail::put_be32(b, kIdxImagesMagic);
  detail::put_be32(b, img.count);
  detail::put_be32(b, img.rows);
  detail::put_be32(b, img.cols);
  b.insert(b.end(), img.pixels.begin(), img.pixels.end());
  return b;
}

inline std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b;
  detail::put_be32(b, kIdxLabelsMagic);
  detail::put_be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

// Pixels scaled to [0, 1], one flattened image per row. limit = 0 loads all.
inline LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                               std::size_t limit = 0) {
  const IdxImages img = parse_idx_images(read_file(images_path));
  const auto labels = parse_idx_labels(read_file(labels_path));
  require(labels.size() == img.count, ErrorKind::kDataFormat, "idx: image and label count mismatch");
  std::size_t n = img.count;
  if (limit > 0) n = std::min(n, limit);
  const std::size_t width = std::size_t{img.rows} * img.cols;

  LabeledDataset ds;
  ds.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  ds.labels.resize(n);
  int max_label = 0;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t k = 0; k < width; ++k)
      ds.X(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = img.pixels[p * width + k] / 255.0;
    ds.labels[p] = labels[p];
    max_label = std::max<int>(max_label, labels[p]);
  }
  for (int c = 0; c <= max_label; ++c) ds.class_names.push_back(std::to_string(c));
  return ds;
}

// ---------------------------------------------------------------- CSV

// Header row required; the column named "label" holds integer classes and
// every other column is a numeric feature.
inline LabeledDataset load_csv(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  };
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kDataFormat, "csv: missing header row");
  const auto header = split(line);
  const auto it = std::find(header.begin(), header.end(), "label");
  require(it != header.end(), ErrorKind::kDataFormat, "csv: no column named label");
  const std::size_t label_col = static_cast<std::size_t>(it - header.begin());
  const std::size_t width = header.size() - 1;
  require(width >= 1, ErrorKind::kDataFormat, "csv: no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    require(cells.size() == header.size(), ErrorKind::kDataFormat, "csv: wrong cell count on line " + std::to_string(line_no));
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v = 0.0;
      const auto* first = cells[k].data();
      const auto* last = first + cells[k].size();
      const auto res = std::from_chars(first, last, v);
      require(res.ec == std::errc() && res.ptr == last, ErrorKind::kDataFormat,
              "csv: bad number on line " + std::to_string(line_no));
      if (k == label_col) {
        require(v >= 0.0 && v == std::floor(v), ErrorKind::kDataFormat, "csv: label must be a nonnegative integer");
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
    if (limit > 0 && labels.size() >= limit) break;
  }
  LabeledDataset ds;
  ds.X = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(width));
  ds.labels = std::move(labels);
  for (int c = 0; c < ds.n_classes(); ++c) ds.class_names.push_back(std::to_string(c));
  return ds;
}

// ---------------------------------------------------------------- images

enum class PixelFormat { kRgb8, kGray8, kBinary, kHsv8 };

inline int channel_count(PixelFormat f) { return f == PixelFormat::kRgb8 || f == PixelFormat::kHsv8 ? 3 : 1; }

struct ImageFrame {
  int width = 0;
  int height = 0;
  PixelFormat format = PixelFormat::kRgb8;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved channels

  ImageFrame() = default;
  ImageFrame(int w, int h, PixelFormat f)
      : width(w), height(h), format(f), pixels(static_cast<std::size_t>(w) * h * channel_count(f), 0) {
    require(w >= 1 && h >= 1, ErrorKind::kInvalidArgument, "image: empty frame");
  }

  int channels() const { return channel_count(format); }
  std::uint8_t& at(int r, int c, int ch = 0) {
    return pixels[(static_cast<std::size_t>(r) * width + c) * channels() + ch];
  }
  std::uint8_t at(int r, int c, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(r) * width + c) * channels() + ch];
  }
  bool contains(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
};

namespace detail {

inline void skip_pnm_space(const std::vector<std::uint8_t>& b, std::size_t& at) {
  while (at < b.size()) {
    if (b[at] == '#') {
      while (at < b.size() && b[at] != '\n') ++at;
    } else if (std::isspace(b[at])) {
      ++at;
    } else {
      break;
    }
  }
}

inline int read_pnm_int(const std::vector<std::uint8_t>& b, std::size_t& at) {
  skip_pnm_space(b, at);
  int v = 0;
  bool any = false;
  while (at < b.size() && std::isdigit(b[at])) {
    v = v * 10 + (b[at] - '0');
    ++at;
    any = true;
    require(v <= (1 << 24), ErrorKind::kDataFormat, "pnm: header value too large");
  }
  require(any, ErrorKind::kDataFormat, "pnm: malformed header");
  return v;
}

}  // namespace detail

// Binary PPM (P6) to rgb8, or PGM (P5) to gray8. maxval must be 255.
inline ImageFrame decode_pnm(const std::vector<std::uint8_t>& b) {
  require(b.size() >= 2 && b[0] == 'P' && (b[1] == '6' || b[1] == '5'), ErrorKind::kDataFormat, "pnm: expected P6 or P5");
  std::size_t at = 2;
  const int w = detail::read_pnm_int(b, at);
  const int h = detail::read_pnm_int(b, at);
  const int maxval = detail::read_pnm_int(b, at);
  require(maxval == 255, ErrorKind::kDataFormat, "pnm: only maxval 255 is supported");
  require(at < b.size() && std::isspace(b[at]), ErrorKind::kDataFormat, "pnm: malformed header");
  ++at;
  ImageFrame img(w, h, b[1] == '6' ? PixelFormat::kRgb8 : PixelFormat::kGray8);
  require(b.size() - at >= img.pixels.size(), ErrorKind::kDataFormat, "pnm: truncated payload");
  std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(at), img.pixels.size(), img.pixels.begin());
  return img;
}

// rgb8 as P6; gray8 and binary as P5 (binary 1 written as 255).
inline std::vector<std::uint8_t> encode_pnm(const ImageFrame& img) {
  require(img.format != PixelFormat::kHsv8, ErrorKind::kInvalidArgument, "pnm: cannot encode hsv frames");
  const bool rgb = img.format == PixelFormat::kRgb8;
  const std::string header =
      std::string(rgb ? "P6" : "P5") + "\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (img.format == PixelFormat::kBinary) {
    for (auto v : img.pixels) out.push_back(v ? 255 : 0);
  } else {
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  }
  return out;
}

inline ImageFrame read_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

inline void write_pnm(const std::filesystem::path& path, const ImageFrame& img) {
  const auto bytes = encode_pnm(img);
  write_file_atomic(path, bytes.data(), bytes.size());
}

// ---------------------------------------------------------------- HSV

// 8-bit hue code for H in degrees: floor(H * 256 / 360).
inline double hue_degrees(std::uint8_t code) { return code * 360.0 / 256.0; }

// Hexcone HSV. Channel 0 holds the hue code, channels 1 and 2 hold
// round(255 * S) and round(255 * V).
inline ImageFrame rgb_to_hsv(const ImageFrame& img) {
  require(img.format == PixelFormat::kRgb8, ErrorKind::kInvalidArgument, "rgb_to_hsv: expected rgb8 input");
  ImageFrame out(img.width, img.height, PixelFormat::kHsv8);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double R = img.at(r, c, 0) / 255.0, G = img.at(r, c, 1) / 255.0, B = img.at(r, c, 2) / 255.0;
      const double mx = std::max({R, G, B}), mn = std::min({R, G, B});
      const double delta = mx - mn;
      double h = 0.0;
      if (delta > 0.0) {
        if (mx == R) h = 60.0 * std::fmod((G - B) / delta, 6.0);
        else if (mx == G) h = 60.0 * ((B - R) / delta + 2.0);
        else h = 60.0 * ((R - G) / delta + 4.0);
        if (h < 0.0) h += 360.0;
      }
      const double s = mx > 0.0 ? delta / mx : 0.0;
      out.at(r, c, 0) = static_cast<std::uint8_t>(std::min(255.0, std::floor(h * 256.0 / 360.0)));
      out.at(r, c, 1) = static_cast<std::uint8_t>(std::lround(s * 255.0));
      out.at(r, c, 2) = static_cast<std::uint8_t>(std::lround(mx * 255.0));
    }
  }
  return out;
}

// ---------------------------------------------------------------- segmentation

struct HueBand {
  double lo_deg = 0.0;
  double hi_deg = 0.0;  // lo > hi wraps through 0 degrees

  bool contains(double h) const { return lo_deg <= hi_deg ? (h >= lo_deg && h <= hi_deg) : (h >= lo_deg || h <= hi_deg); }
};

struct SegmentParams {
  double min_saturation = 0.35;
  double min_value = 0.25;
  double threshold = 0.5;  // fraction of the blurred maximum
  int first_blur = 3;
  int second_blur = 7;
};

struct Centroid {
  int row = 0;
  int col = 0;
};

struct Segmentation {
  ImageFrame mask;  // binary, largest component only
  Centroid centroid;
  std::size_t area = 0;
};

namespace detail {

// Mean over the in-bounds part of a k x k window.
inline std::vector<double> box_blur(const std::vector<double>& src, int w, int h, int k) {
  const int half = k / 2;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      int n = 0;
      for (int d = -half; d <= half; ++d)
        if (c + d >= 0 && c + d < w) {
          s += src[static_cast<std::size_t>(r) * w + c + d];
          ++n;
        }
      tmp[static_cast<std::size_t>(r) * w + c] = s / n;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      int n = 0;
      for (int d = -half; d <= half; ++d)
        if (r + d >= 0 && r + d < h) {
          s += tmp[static_cast<std::size_t>(r + d) * w + c];
          ++n;
        }
      out[static_cast<std::size_t>(r) * w + c] = s / n;
    }
  return out;
}

inline void threshold_in_place(std::vector<double>& v, double frac) {
  const double mx = *std::max_element(v.begin(), v.end());
  const double cut = frac * mx;
  for (double& x : v) x = (mx > 0.0 && x >= cut) ? 1.0 : 0.0;
}

}  // namespace detail

// Hue-band mask, 3x3 blur, threshold, 7x7 blur, threshold, then the largest
// 8-connected component and its rounded pixel-mean centroid.
inline Segmentation segment_object(const ImageFrame& img, HueBand band, const SegmentParams& params = {}) {
  require(img.format == PixelFormat::kRgb8, ErrorKind::kInvalidArgument, "segment_object: expected rgb8 input");
  const ImageFrame hsv = rgb_to_hsv(img);
  const int w = img.width, h = img.height;
  std::vector<double> mask(static_cast<std::size_t>(w) * h, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const bool in = band.contains(hue_degrees(hsv.at(r, c, 0))) && hsv.at(r, c, 1) >= params.min_saturation * 255.0 &&
                      hsv.at(r, c, 2) >= params.min_value * 255.0;
      mask[static_cast<std::size_t>(r) * w + c] = in ? 1.0 : 0.0;
    }
  require(std::any_of(mask.begin(), mask.end(), [](double v) { return v > 0.0; }), ErrorKind::kDataFormat,
          "no object in hue band");

  mask = detail::box_blur(mask, w, h, params.first_blur);
  detail::threshold_in_place(mask, params.threshold);
  mask = detail::box_blur(mask, w, h, params.second_blur);
  detail::threshold_in_place(mask, params.threshold);

  std::vector<int> comp(mask.size(), -1);
  int best = -1;
  std::size_t best_area = 0;
  int next = 0;
  std::queue<std::pair<int, int>> q;
  for (int r0 = 0; r0 < h; ++r0)
    for (int c0 = 0; c0 < w; ++c0) {
      const std::size_t i0 = static_cast<std::size_t>(r0) * w + c0;
      if (mask[i0] == 0.0 || comp[i0] >= 0) continue;
      std::size_t area = 0;
      comp[i0] = next;
      q.emplace(r0, c0);
      while (!q.empty()) {
        auto [r, c] = q.front();
        q.pop();
        ++area;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
            if (mask[j] == 0.0 || comp[j] >= 0) continue;
            comp[j] = next;
            q.emplace(rr, cc);
          }
      }
      if (area > best_area) {
        best_area = area;
        best = next;
      }
      ++next;
    }
  require(best >= 0, ErrorKind::kDataFormat, "no object in hue band");

  Segmentation seg;
  seg.mask = ImageFrame(w, h, PixelFormat::kBinary);
  double sr = 0.0, sc = 0.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (comp[static_cast<std::size_t>(r) * w + c] == best) {
        seg.mask.at(r, c) = 1;
        sr += r;
        sc += c;
      }
  seg.area = best_area;
  seg.centroid.row = static_cast<int>(std::lround(sr / static_cast<double>(best_area)));
  seg.centroid.col = static_cast<int>(std::lround(sc / static_cast<double>(best_area)));
  return seg;
}

inline constexpr int kPatchSide = 52;

// side x side crop whose top-left corner is centroid - side/2, zero-padded
// outside the frame, values in {0, 1}, flattened row-major.
inline RowVector extract_patch(const ImageFrame& mask, Centroid centroid, int side = kPatchSide) {
  require(mask.channels() == 1, ErrorKind::kInvalidArgument, "extract_patch: expected a single-channel mask");
  require(mask.contains(centroid.row, centroid.col), ErrorKind::kInvalidArgument, "extract_patch: centroid outside frame");
  require(side >= 1, ErrorKind::kInvalidArgument, "extract_patch: side must be positive");
  RowVector patch = RowVector::Zero(static_cast<Eigen::Index>(side) * side);
  const int r0 = centroid.row - side / 2, c0 = centroid.col - side / 2;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      if (mask.contains(r0 + r, c0 + c) && mask.at(r0 + r, c0 + c) != 0)
        patch(static_cast<Eigen::Index>(r) * side + c) = 1.0;
  return patch;
}

// ---------------------------------------------------------------- synthetic shapes

enum class ShapeKind { kBox = 0, kCircle = 1, kIrregular = 2, kTriangle = 3 };

inline constexpr std::array<const char*, 4> kShapeNames = {"box", "circle", "irregular", "triangle"};

struct Pose {
  double scale = 14.0;     // pixels per unit of the shape's local frame
  double rotation = 0.0;   // radians
  double row = 50.0;       // center
  double col = 50.0;
};

struct SynthParams {
  int width = 100;
  int height = 100;
  double hue_deg = 0.0;
  double hue_jitter_deg = 6.0;
  double noise_level = 0.04;  // additive Gaussian sigma as a fraction of 255
};

struct SynthFrame {
  ImageFrame image;
  int label = 0;
};

namespace detail {

inline bool inside_polygon(double x, double y, const std::vector<std::array<double, 2>>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
  }
  return in;
}

inline std::vector<std::array<double, 2>> regular_polygon(int n, double radius, double phase) {
  std::vector<std::array<double, 2>> p;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / n;
    p.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return p;
}

// Non-convex seven-point outline; radii jitter per instance.
inline std::vector<std::array<double, 2>> irregular_outline(Rng& rng) {
  static constexpr std::array<double, 7> radii = {1.05, 0.55, 0.95, 0.45, 1.0, 0.7, 0.85};
  std::vector<std::array<double, 2>> p;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / radii.size();
    const double r = radii[i] * rng.uniform(0.92, 1.08);
    p.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return p;
}

inline std::array<std::uint8_t, 3> hsv_to_rgb8(double h_deg, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h_deg < 0 ? h_deg + 360.0 : h_deg, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) r = c, g = x;
  else if (hp < 2) r = x, g = c;
  else if (hp < 3) g = c, b = x;
  else if (hp < 4) g = x, b = c;
  else if (hp < 5) r = x, b = c;
  else r = c, b = x;
  const double m = v - c;
  auto q = [](double u) { return static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0)); };
  return {q(r + m), q(g + m), q(b + m)};
}

}  // namespace detail

// Colored shape on a dark background with per-channel Gaussian noise and a
// jittered hue. The shape's local frame is scaled, rotated and centered per
// the pose; pixel (r, c) is filled when its center falls inside.
inline SynthFrame synth_shape(ShapeKind kind, const Pose& pose, Rng& rng, const SynthParams& params = {}) {
  require(pose.scale > 0.0, ErrorKind::kInvalidArgument, "synth_shape: degenerate pose (scale must be positive)");
  require(pose.row >= 0 && pose.row < params.height && pose.col >= 0 && pose.col < params.width,
          ErrorKind::kInvalidArgument, "synth_shape: pose center outside frame");

  std::vector<std::array<double, 2>> poly;
  switch (kind) {
    case ShapeKind::kBox: poly = detail::regular_polygon(4, 0.8 * std::numbers::sqrt2, std::numbers::pi / 4); break;
    case ShapeKind::kTriangle: poly = detail::regular_polygon(3, 1.15, std::numbers::pi / 2); break;
    case ShapeKind::kIrregular: poly = detail::irregular_outline(rng); break;
    case ShapeKind::kCircle: break;
  }
  const double hue = params.hue_deg + rng.uniform(-params.hue_jitter_deg, params.hue_jitter_deg);
  const auto fg = detail::hsv_to_rgb8(hue, rng.uniform(0.7, 1.0), rng.uniform(0.75, 1.0));
  const double bg_level = rng.uniform(10.0, 40.0);

  SynthFrame out{ImageFrame(params.width, params.height, PixelFormat::kRgb8), static_cast<int>(kind)};
  const double cs = std::cos(pose.rotation), sn = std::sin(pose.rotation);
  const double sigma = params.noise_level * 255.0;
  for (int r = 0; r < params.height; ++r)
    for (int c = 0; c < params.width; ++c) {
      const double dy = (r - pose.row) / pose.scale, dx = (c - pose.col) / pose.scale;
      const double u = cs * dx + sn * dy, v = -sn * dx + cs * dy;
      const bool in = kind == ShapeKind::kCircle ? (u * u + v * v <= 0.9 * 0.9) : detail::inside_polygon(u, v, poly);
      for (int ch = 0; ch < 3; ++ch) {
        const double base = in ? fg[static_cast<std::size_t>(ch)] : bg_level;
        const double noisy = sigma > 0.0 ? base + sigma * rng.normal() : base;
        out.image.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(noisy, 0.0, 255.0)));
      }
    }
  return out;
}

inline Pose random_pose(Rng& rng, const SynthParams& params) {
  Pose p;
  p.scale = rng.uniform(11.0, 17.0);
  p.rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double margin = 22.0;
  p.row = rng.uniform(margin, params.height - margin);
  p.col = rng.uniform(margin, params.width - margin);
  return p;
}

// Small perturbation of a base pose, as seen by a camera hovering over the
// same object.
inline Pose jitter_pose(const Pose& base, Rng& rng, const SynthParams& params) {
  Pose p = base;
  p.scale *= rng.uniform(0.93, 1.07);
  p.rotation += rng.uniform(-0.2, 0.2);
  p.row = std::clamp(p.row + rng.uniform(-3.0, 3.0), 0.0, params.height - 1.0);
  p.col = std::clamp(p.col + rng.uniform(-3.0, 3.0), 0.0, params.width - 1.0);
  return p;
}

inline constexpr HueBand kRedBand{340.0, 20.0};

// Segment and extract one frame into a patch row.
inline RowVector frame_features(const ImageFrame& frame, HueBand band, const SegmentParams& params = {}) {
  const Segmentation seg = segment_object(frame, band, params);
  return extract_patch(seg.mask, seg.centroid);
}

}  // namespace hml
