#pragma once

#include "sets/env/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sets::env {

/// Thresholded traversability map. Cell (r, c) covers
/// [ox + c·res, ox + (c+1)·res) × [oy + r·res, oy + (r+1)·res).
struct HazardGrid {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 0.1;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, 1 = untraversable

  HazardGrid() = default;
  HazardGrid(Eigen::Vector2d o, double res, int r, int c)
      : origin(std::move(o)), resolution(res), rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, 0) {
    if (!(res > 0.0) || r <= 0 || c <= 0) throw ConfigError("HazardGrid: resolution and size must be positive");
  }

  bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
  bool occupied(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c] != 0; }
  void set(int r, int c, bool value) { cells[static_cast<std::size_t>(r) * cols + c] = value ? 1 : 0; }

  int col_of(double x) const { return static_cast<int>(std::floor((x - origin.x()) / resolution)); }
  int row_of(double y) const { return static_cast<int>(std::floor((y - origin.y()) / resolution)); }
  double width() const { return cols * resolution; }
  double height() const { return rows * resolution; }

  /// Marks every cell whose center lies in the axis-aligned rectangle.
  void fill_rect(double x_lo, double y_lo, double x_hi, double y_hi) {
    for (int r = 0; r < rows; ++r) {
      const double yc = origin.y() + (r + 0.5) * resolution;
      if (yc < y_lo || yc > y_hi) continue;
      for (int c = 0; c < cols; ++c) {
        const double xc = origin.x() + (c + 0.5) * resolution;
        if (xc >= x_lo && xc <= x_hi) set(r, c, true);
      }
    }
  }

  /// True when a disc of `radius` at (x, y) touches an occupied cell or
  /// leaves the grid.
  bool disc_collides(double x, double y, double radius) const {
    if (x - radius < origin.x() || y - radius < origin.y() || x + radius > origin.x() + width() ||
        y + radius > origin.y() + height()) {
      return true;
    }
    const int r_lo = row_of(y - radius), r_hi = row_of(y + radius);
    const int c_lo = col_of(x - radius), c_hi = col_of(x + radius);
    const int r_center = row_of(y), c_center = col_of(x);
    for (int r = r_lo; r <= r_hi; ++r) {
      for (int c = c_lo; c <= c_hi; ++c) {
        if (!in_bounds(r, c) || !occupied(r, c)) continue;
        if (r == r_center && c == c_center) return true;
        // Closest point of the cell to the disc center.
        const double cx0 = origin.x() + c * resolution, cy0 = origin.y() + r * resolution;
        const double px = std::clamp(x, cx0, cx0 + resolution);
        const double py = std::clamp(y, cy0, cy0 + resolution);
        if ((px - x) * (px - x) + (py - y) * (py - y) <= radius * radius) return true;
      }
    }
    return false;
  }
};

inline nlohmann::json to_json(const HazardGrid& g) {
  nlohmann::json j;
  j["origin"] = {g.origin.x(), g.origin.y()};
  j["resolution"] = g.resolution;
  j["rows"] = g.rows;
  j["cols"] = g.cols;
  std::vector<int> data(g.cells.begin(), g.cells.end());
  j["data"] = std::move(data);
  return j;
}

inline HazardGrid hazard_grid_from_json(const nlohmann::json& j) {
  try {
    HazardGrid g(Eigen::Vector2d(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()),
                 j.at("resolution").get<double>(), j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& data = j.at("data");
    if (data.size() != g.cells.size()) throw ConfigError("HazardGrid: data length does not match rows*cols");
    for (std::size_t i = 0; i < g.cells.size(); ++i) g.cells[i] = data[i].get<int>() != 0 ? 1 : 0;
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("HazardGrid: ") + e.what());
  }
}

/// Walled corridor with three alternating baffles, used by the driving demo.
/// The vehicle starts near (0, 0) facing +x.
inline HazardGrid make_chicane_map() {
  HazardGrid g(Eigen::Vector2d(-3.0, -3.0), 0.1, 60, 260);
  const double x_lo = -3.0, x_hi = 23.0;
  g.fill_rect(x_lo, -3.0, x_hi, -2.5);  // south wall
  g.fill_rect(x_lo, 2.5, x_hi, 3.0);    // north wall
  g.fill_rect(x_lo, -3.0, -2.5, 3.0);   // west wall
  g.fill_rect(22.5, -3.0, x_hi, 3.0);   // east wall
  g.fill_rect(5.0, -2.5, 5.4, 0.8);     // baffle, gap to the north
  g.fill_rect(10.0, -0.8, 10.4, 2.5);   // baffle, gap to the south
  g.fill_rect(15.0, -2.5, 15.4, 0.8);   // baffle, gap to the north
  return g;
}

}  // namespace sets::env
