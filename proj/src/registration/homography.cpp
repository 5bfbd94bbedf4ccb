#include "annotweave/registration/homography.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <vector>

namespace annotweave {

BoundingBox map_box(const HomographyD& h, const BoundingBox& box, ImageSize target) {
  const Eigen::Vector2d corners[] = {
      {box.ul_x, box.ul_y}, {box.lr_x, box.ul_y}, {box.lr_x, box.lr_y}, {box.ul_x, box.lr_y}};
  Eigen::Vector2d lo = h.map(corners[0]);
  Eigen::Vector2d hi = lo;
  for (const auto& c : corners) {
    const Eigen::Vector2d q = h.map(c);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  // Snap values within 1e-9 of an integer so exact maps are not widened by rounding noise.
  auto snap_floor = [](double v) {
    const double r = std::round(v);
    return static_cast<int>(std::abs(v - r) < 1e-9 ? r : std::floor(v));
  };
  auto snap_ceil = [](double v) {
    const double r = std::round(v);
    return static_cast<int>(std::abs(v - r) < 1e-9 ? r : std::ceil(v));
  };
  const double limit = 1e9;
  lo = lo.cwiseMax(-limit).cwiseMin(limit);
  hi = hi.cwiseMax(-limit).cwiseMin(limit);
  const BoundingBox mapped{snap_floor(lo.x()), snap_floor(lo.y()), snap_ceil(hi.x()), snap_ceil(hi.y())};
  const BoundingBox clipped = intersect(mapped, BoundingBox{0, 0, target.width, target.height});
  if (clipped.empty()) throw Error(ErrorCode::OutOfView, "mapped box lies outside the target image");
  return clipped;
}

PixelMask map_mask(const HomographyD& h, const PixelMask& mask, ImageSize target) {
  const HomographyD inv = h.inverse();
  PixelMask out(target.width, target.height);
  const Eigen::Matrix3d& m = inv.matrix();
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      const Eigen::Vector3d q = m * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
      if (std::abs(q.z()) < HomographyD::kInfinityTolerance) continue;
      const double sx = std::floor(q.x() / q.z());
      const double sy = std::floor(q.y() / q.z());
      if (sx < 0 || sy < 0 || sx >= mask.width() || sy >= mask.height()) continue;
      out.object(y, x) = mask.object(static_cast<int>(sy), static_cast<int>(sx));
      out.dontcare(y, x) = mask.dontcare(static_cast<int>(sy), static_cast<int>(sx));
    }
  }
  return out;
}

namespace {

struct MatrixEntry {
  int rows = -1;
  int cols = -1;
  std::vector<double> data;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Collects top-level keys whose value is a mapping with rows/cols/data entries.
std::map<std::string, MatrixEntry> parse_matrix_document(const std::string& text) {
  std::map<std::string, MatrixEntry> out;
  std::istringstream in(text);
  std::string line;
  std::string current;
  bool in_data = false;
  std::string data_text;
  static const std::regex key_re(R"(^([A-Za-z_][A-Za-z0-9_]*)\s*:.*$)");
  static const std::regex field_re(R"(^\s+(rows|cols|dt|data)\s*:\s*(.*)$)");

  auto flush_data = [&]() {
    std::string cleaned = data_text;
    std::replace(cleaned.begin(), cleaned.end(), '[', ' ');
    std::replace(cleaned.begin(), cleaned.end(), ']', ' ');
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream vs(cleaned);
    std::string tok;
    while (vs >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw Error(ErrorCode::MalformedMatrix, "bad number '" + tok + "'");
        out[current].data.push_back(v);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::MalformedMatrix, "bad number '" + tok + "' under " + current);
      }
    }
    data_text.clear();
    in_data = false;
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_data) {
      data_text += ' ' + line;
      if (line.find(']') != std::string::npos) flush_data();
      continue;
    }
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%' || t[0] == '#' || t == "---") continue;
    std::smatch m;
    if (line[0] != ' ' && line[0] != '\t' && std::regex_match(line, m, key_re)) {
      current = m[1];
      out[current];
      continue;
    }
    if (!current.empty() && std::regex_match(line, m, field_re)) {
      const std::string field = m[1];
      const std::string value = trim(m[2]);
      if (field == "rows" || field == "cols") {
        try {
          (field == "rows" ? out[current].rows : out[current].cols) = std::stoi(value);
        } catch (const std::logic_error&) {
          throw Error(ErrorCode::MalformedMatrix, field + " of " + current + " is not an integer");
        }
      } else if (field == "data") {
        data_text = value;
        in_data = true;
        if (value.find(']') != std::string::npos || value.find('[') == std::string::npos) flush_data();
      }
    }
  }
  if (in_data) throw Error(ErrorCode::MalformedMatrix, "unterminated data list under " + current);
  return out;
}

std::optional<HomographyD> matrix_for(const std::map<std::string, MatrixEntry>& doc, const std::string& key,
                                      HomographyDirection dir) {
  const auto it = doc.find(key);
  if (it == doc.end()) return std::nullopt;
  const auto& e = it->second;
  if (e.rows != 3 || e.cols != 3 || e.data.size() != 9) {
    throw Error(ErrorCode::MalformedMatrix,
                key + " must be a 3x3 matrix (rows=" + std::to_string(e.rows) + ", cols=" + std::to_string(e.cols) +
                    ", values=" + std::to_string(e.data.size()) + ")");
  }
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = e.data[static_cast<std::size_t>(r * 3 + c)];
  }
  return HomographyD(m, dir);
}

}  // namespace

HomographyPair parse_homographies(const std::string& text, MissingMatrix policy) {
  const auto doc = parse_matrix_document(text);
  auto fwd = matrix_for(doc, kRgbToThermalKey, HomographyDirection::RgbToThermal);
  auto bwd = matrix_for(doc, kThermalToRgbKey, HomographyDirection::ThermalToRgb);
  if (fwd && bwd) return {*fwd, *bwd, {}};
  if (policy == MissingMatrix::Reject && (fwd || bwd)) {
    throw Error(ErrorCode::MissingKey, std::string("homography file lacks ") + (fwd ? kThermalToRgbKey : kRgbToThermalKey),
                fwd ? kThermalToRgbKey : kRgbToThermalKey);
  }
  if (fwd) return {*fwd, fwd->inverse(), std::string(kThermalToRgbKey) + " missing; derived by inversion"};
  if (bwd) return {bwd->inverse(), *bwd, std::string(kRgbToThermalKey) + " missing; derived by inversion"};
  throw Error(ErrorCode::MissingKey, "homography file has neither homRgbToT nor homTToRgb");
}

HomographyPair load_homographies(const std::filesystem::path& path, MissingMatrix policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_homographies(ss.str(), policy);
}

std::string format_homographies(const HomographyPair& pair) {
  std::string out = "%YAML:1.0\n";
  auto emit = [&](const char* key, const HomographyD& h) {
    out += key;
    out += ": !!opencv-matrix\n   rows: 3\n   cols: 3\n   dt: d\n   data: [ ";
    char buf[64];
    for (int i = 0; i < 9; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", h.matrix()(i / 3, i % 3));
      out += buf;
      out += i < 8 ? ", " : " ]\n";
    }
  };
  emit(kRgbToThermalKey, pair.rgb_to_thermal);
  emit(kThermalToRgbKey, pair.thermal_to_rgb);
  return out;
}

void save_homographies(const std::filesystem::path& path, const HomographyPair& pair) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << format_homographies(pair);
}

}  // namespace annotweave
