#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sphereloc/geo.hpp"

namespace sphereloc {

OverheadMap::OverheadMap(int width, int height, double gsd, double origin_x, double origin_y)
    : OverheadMap(width, height, gsd, origin_x, origin_y,
                  std::vector<std::uint8_t>(static_cast<size_t>(std::max(width, 0)) * std::max(height, 0) * 3, 0)) {}

OverheadMap::OverheadMap(int width, int height, double gsd, double origin_x, double origin_y,
                         std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), gsd_(gsd), origin_x_(origin_x), origin_y_(origin_y), rgb_(std::move(rgb)) {
  if (width <= 0 || height <= 0) throw InvalidInput("OverheadMap: raster must be non-empty");
  if (!(gsd > 0.0) || !std::isfinite(gsd)) throw InvalidInput("OverheadMap: gsd must be > 0");
  if (rgb_.size() != static_cast<size_t>(width) * height * 3)
    throw InvalidInput("OverheadMap: raster size does not match width x height x 3");
}

bool OverheadMap::contains(double x, double y) const {
  const double u = (x - origin_x_) / gsd_ + 0.5;
  const double v = (y - origin_y_) / gsd_ + 0.5;
  return u >= 0.0 && v >= 0.0 && u < width_ && v < height_;
}

std::optional<Eigen::Vector3d> OverheadMap::sample(double x, double y) const {
  return sample_local(x - origin_x_, y - origin_y_);
}

std::optional<Eigen::Vector3d> OverheadMap::sample_local(double dx, double dy) const {
  const double u = dx / gsd_;
  const double v = dy / gsd_;
  if (!(u >= 0.0 && v >= 0.0 && u <= width_ - 1 && v <= height_ - 1)) return std::nullopt;
  const int u0 = std::min(static_cast<int>(u), std::max(width_ - 2, 0));
  const int v0 = std::min(static_cast<int>(v), std::max(height_ - 2, 0));
  const int u1 = std::min(u0 + 1, width_ - 1);
  const int v1 = std::min(v0 + 1, height_ - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  Eigen::Vector3d out;
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - fu) * at(v0, u0, c) + fu * at(v0, u1, c);
    const double bottom = (1.0 - fu) * at(v1, u0, c) + fu * at(v1, u1, c);
    out(c) = ((1.0 - fv) * top + fv * bottom) / 255.0;
  }
  return out;
}

namespace {

// Skips whitespace and '#' comments in a PNM header.
void skip_header_space(std::istream& in) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const char* field) {
  skip_header_space(in);
  int value = 0;
  if (!(in >> value)) throw FormatError(std::string("ppm: cannot read ") + field, field);
  return value;
}

}  // namespace

RgbRaster read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("ppm: cannot open " + path.string(), "path");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') throw FormatError("ppm: expected binary P6 magic", "magic");
  RgbRaster r;
  r.width = read_header_int(in, "width");
  r.height = read_header_int(in, "height");
  const int maxval = read_header_int(in, "maxval");
  if (r.width <= 0 || r.height <= 0) throw FormatError("ppm: empty raster", "width");
  if (maxval != 255) throw FormatError("ppm: maxval must be 255", "maxval");
  in.get();  // single whitespace before the pixel block
  r.rgb.resize(static_cast<size_t>(r.width) * r.height * 3);
  in.read(reinterpret_cast<char*>(r.rgb.data()), static_cast<std::streamsize>(r.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.rgb.size())) throw FormatError("ppm: truncated pixel data", "data");
  return r;
}

void write_ppm(const std::filesystem::path& path, const RgbRaster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("ppm: cannot write " + path.string(), "path");
  out << "P6\n" << raster.width << ' ' << raster.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.rgb.data()), static_cast<std::streamsize>(raster.rgb.size()));
}

OverheadMap load_map(const std::filesystem::path& raster_path, const std::filesystem::path& sidecar_path) {
  RgbRaster raster = read_ppm(raster_path);
  std::ifstream in(sidecar_path);
  if (!in) throw FormatError("sidecar: cannot open " + sidecar_path.string(), "path");
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sidecar: invalid JSON: ") + e.what(), "json");
  }
  if (!meta.is_object()) throw FormatError("sidecar: top level must be an object", "json");
  auto number = [&](const char* key) {
    if (!meta.contains(key)) throw FormatError(std::string("sidecar: missing field ") + key, key);
    const auto& v = meta[key];
    if (!v.is_number() || !std::isfinite(v.get<double>()))
      throw FormatError(std::string("sidecar: field is not a finite number: ") + key, key);
    return v.get<double>();
  };
  const double gsd = number("gsd_m_per_px");
  if (gsd <= 0.0) throw FormatError("sidecar: gsd_m_per_px must be > 0", "gsd_m_per_px");
  const double ox = number("origin_x_m");
  const double oy = number("origin_y_m");
  if (meta.contains("crs_note") && !meta["crs_note"].is_string())
    throw FormatError("sidecar: crs_note must be a string", "crs_note");
  return OverheadMap(raster.width, raster.height, gsd, ox, oy, std::move(raster.rgb));
}

void save_map(const OverheadMap& map, const std::filesystem::path& raster_path,
              const std::filesystem::path& sidecar_path, const std::string& crs_note) {
  write_ppm(raster_path, RgbRaster{map.width(), map.height(), map.rgb()});
  nlohmann::json meta = {{"gsd_m_per_px", map.gsd()},
                         {"origin_x_m", map.origin_x()},
                         {"origin_y_m", map.origin_y()},
                         {"crs_note", crs_note}};
  std::ofstream out(sidecar_path);
  if (!out) throw FormatError("sidecar: cannot write " + sidecar_path.string(), "path");
  out << meta.dump(2) << '\n';
}

RgbRaster to_raster(const SphericalImaged& image) {
  if (image.channels() != 1 && image.channels() != 3)
    throw ShapeError("to_raster: only 1- or 3-channel images can be written");
  RgbRaster r{image.size(), image.size(), {}};
  r.rgb.resize(static_cast<size_t>(r.width) * r.height * 3);
  for (int j = 0; j < image.size(); ++j)
    for (int k = 0; k < image.size(); ++k)
      for (int c = 0; c < 3; ++c) {
        const double v = image(j, k, image.channels() == 3 ? c : 0);
        r.rgb[(static_cast<size_t>(j) * r.width + k) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
  return r;
}

SphericalImaged from_raster(const RgbRaster& raster) {
  if (raster.width != raster.height || raster.width % 2 != 0)
    throw ShapeError("from_raster: spherical images must be square with an even side (2B)");
  SphericalImaged img(raster.width / 2, 3);
  for (int j = 0; j < raster.height; ++j)
    for (int k = 0; k < raster.width; ++k)
      for (int c = 0; c < 3; ++c) img(j, k, c) = raster.rgb[(static_cast<size_t>(j) * raster.width + k) * 3 + c] / 255.0;
  return img;
}

}  // namespace sphereloc
