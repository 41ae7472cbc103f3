// Copyright 2026 The tscox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TSCOX_GEOMETRY_HPP
#define TSCOX_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/random.hpp"

/// \file
/// Planar windows, areal partitions, gridded covariate lattices and the lookup
/// that assigns spatial covariates to arbitrary locations. Coordinates are
/// planar and must already be projected into a common length unit.

namespace tscox {

struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

inline double distance(const Location& a, const Location& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  [[nodiscard]] double width() const { return xmax - xmin; }
  [[nodiscard]] double height() const { return ymax - ymin; }
  [[nodiscard]] double area() const { return width() * height(); }

  [[nodiscard]] BoundingBox merged(const BoundingBox& o) const {
    return {std::min(xmin, o.xmin), std::min(ymin, o.ymin), std::max(xmax, o.xmax), std::max(ymax, o.ymax)};
  }
};

namespace detail {

inline double cross(const Location& o, const Location& a, const Location& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(const Location& p, const Location& a, const Location& b, double tol) {
  const double len = distance(a, b);
  if (len == 0.0) return distance(p, a) <= tol;
  if (std::abs(cross(a, b, p)) / len > tol) return false;
  return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
         p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

// Proper or touching intersection of closed segments ab and cd.
inline bool segments_intersect(const Location& a, const Location& b, const Location& c, const Location& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(a, c, d, 0.0)) return true;
  if (d2 == 0 && on_segment(b, c, d, 0.0)) return true;
  if (d3 == 0 && on_segment(c, a, b, 0.0)) return true;
  if (d4 == 0 && on_segment(d, a, b, 0.0)) return true;
  return false;
}

}  // namespace detail

/// Simple polygon stored as an open ring (the closing vertex is not repeated).
class Polygon {
 public:
  Polygon() = default;

  explicit Polygon(std::vector<Location> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
    for (const auto& v : vertices_) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) fail(ErrorKind::Geometry, "polygon vertex is not finite");
    }
    if (vertices_.size() < 3) fail(ErrorKind::Geometry, "polygon needs at least 3 distinct vertices");
    bbox_ = {vertices_[0].x, vertices_[0].y, vertices_[0].x, vertices_[0].y};
    for (const auto& v : vertices_) {
      bbox_.xmin = std::min(bbox_.xmin, v.x);
      bbox_.ymin = std::min(bbox_.ymin, v.y);
      bbox_.xmax = std::max(bbox_.xmax, v.x);
      bbox_.ymax = std::max(bbox_.ymax, v.y);
    }
    double twice = 0.0;
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[(i + 1) % n];
      twice += a.x * b.y - b.x * a.y;
    }
    area_ = std::abs(twice) / 2.0;
    tolerance_ = 1e-12 * std::max({1.0, bbox_.width(), bbox_.height()});
  }

  static Polygon rectangle(double xmin, double ymin, double xmax, double ymax) {
    return Polygon({{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}});
  }

  [[nodiscard]] const std::vector<Location>& vertices() const { return vertices_; }
  [[nodiscard]] std::size_t size() const { return vertices_.size(); }
  [[nodiscard]] double area() const { return area_; }
  [[nodiscard]] const BoundingBox& bbox() const { return bbox_; }

  [[nodiscard]] bool on_boundary(const Location& s) const {
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
      if (detail::on_segment(s, vertices_[i], vertices_[(i + 1) % n], tolerance_)) return true;
    }
    return false;
  }

  /// Boundary points count as inside.
  [[nodiscard]] bool contains(const Location& s) const {
    if (s.x < bbox_.xmin - tolerance_ || s.x > bbox_.xmax + tolerance_ || s.y < bbox_.ymin - tolerance_ ||
        s.y > bbox_.ymax + tolerance_) {
      return false;
    }
    if (on_boundary(s)) return true;
    bool inside = false;
    for (std::size_t i = 0, j = vertices_.size() - 1; i < vertices_.size(); j = i++) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[j];
      if ((a.y > s.y) != (b.y > s.y)) {
        const double x_cross = a.x + (s.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (s.x < x_cross) inside = !inside;
      }
    }
    return inside;
  }

  /// True when no two non-adjacent edges meet and no adjacent edges overlap.
  [[nodiscard]] bool is_simple() const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[(i + 1) % n];
      if (a == b) return false;
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
        const auto& c = vertices_[j];
        const auto& d = vertices_[(j + 1) % n];
        if (adjacent) {
          // Adjacent edges share one vertex; they must not fold back onto each other.
          const Location& shared = (j == i + 1) ? b : a;
          const Location& p = (j == i + 1) ? a : b;
          const Location& q = (j == i + 1) ? d : c;
          if (detail::cross(shared, p, q) == 0.0 &&
              (p.x - shared.x) * (q.x - shared.x) + (p.y - shared.y) * (q.y - shared.y) > 0.0) {
            return false;
          }
          continue;
        }
        if (detail::segments_intersect(a, b, c, d)) return false;
      }
    }
    return true;
  }

  /// Uniform draw inside the polygon by rejection from its bounding box.
  [[nodiscard]] Location sample_uniform(Rng& rng) const {
    std::uniform_real_distribution<double> ux(bbox_.xmin, bbox_.xmax);
    std::uniform_real_distribution<double> uy(bbox_.ymin, bbox_.ymax);
    for (;;) {
      const Location s{ux(rng), uy(rng)};
      if (contains(s)) return s;
    }
  }

  /// A deterministic point inside the polygon: the centroid when it is inside,
  /// otherwise the midpoint of the widest interior run along the centroid's scanline.
  [[nodiscard]] Location interior_point() const {
    double cx = 0.0;
    double cy = 0.0;
    double twice = 0.0;
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[(i + 1) % n];
      const double c = a.x * b.y - b.x * a.y;
      twice += c;
      cx += (a.x + b.x) * c;
      cy += (a.y + b.y) * c;
    }
    const Location centroid{cx / (3.0 * twice), cy / (3.0 * twice)};
    if (contains(centroid)) return centroid;
    std::vector<double> xs;
    const double y = centroid.y;
    for (std::size_t i = 0, j = vertices_.size() - 1; i < vertices_.size(); j = i++) {
      const auto& a = vertices_[i];
      const auto& b = vertices_[j];
      if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    Location best = vertices_[0];
    double widest = -1.0;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      if (xs[k + 1] - xs[k] > widest) {
        widest = xs[k + 1] - xs[k];
        best = {(xs[k] + xs[k + 1]) / 2.0, y};
      }
    }
    return best;
  }

 private:
  std::vector<Location> vertices_;
  BoundingBox bbox_;
  double area_ = 0.0;
  double tolerance_ = 0.0;
};

/// Observation window: a validated simple polygon with positive area.
class Window {
 public:
  Window() = default;

  explicit Window(Polygon boundary) : boundary_(std::move(boundary)) {
    if (!(boundary_.area() > 0.0)) fail(ErrorKind::Geometry, "window has zero area");
    if (!boundary_.is_simple()) fail(ErrorKind::Geometry, "window boundary is self-intersecting");
  }

  static Window rectangle(double xmin, double ymin, double xmax, double ymax) {
    return Window(Polygon::rectangle(xmin, ymin, xmax, ymax));
  }

  [[nodiscard]] const Polygon& boundary() const { return boundary_; }
  [[nodiscard]] double area() const { return boundary_.area(); }
  [[nodiscard]] const BoundingBox& bbox() const { return boundary_.bbox(); }
  [[nodiscard]] bool contains(const Location& s) const { return boundary_.contains(s); }

 private:
  Polygon boundary_;
};

inline bool contains(const Window& window, const Location& s) { return window.contains(s); }

struct ArealUnit {
  Polygon polygon;
  Eigen::VectorXd z;
};

/// Areal units (census-tract style) tiling a window, each carrying an attribute vector.
class ArealPartition {
 public:
  ArealPartition() = default;

  ArealPartition(std::vector<ArealUnit> units, Window window, std::vector<std::string> names = {})
      : units_(std::move(units)), window_(std::move(window)), names_(std::move(names)) {
    if (units_.empty()) fail(ErrorKind::Geometry, "partition has no units");
    const auto p = units_.front().z.size();
    if (names_.empty()) {
      for (Eigen::Index j = 0; j < p; ++j) names_.push_back("z" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names_.size()) != p) {
      fail(ErrorKind::Geometry, "attribute name count does not match attribute dimension");
    }
    double total = 0.0;
    for (std::size_t u = 0; u < units_.size(); ++u) {
      if (units_[u].z.size() != p) {
        fail(ErrorKind::Geometry, "unit " + std::to_string(u) + " has attribute dimension " +
                                      std::to_string(units_[u].z.size()) + ", expected " + std::to_string(p));
      }
      for (const auto& v : units_[u].polygon.vertices()) {
        if (!window_.contains(v)) fail(ErrorKind::Geometry, "unit " + std::to_string(u) + " extends outside the window");
      }
      total += units_[u].polygon.area();
    }
    if (std::abs(total - window_.area()) > 1e-6 * window_.area()) {
      fail(ErrorKind::Geometry, "unit areas sum to " + std::to_string(total) + " but window area is " +
                                    std::to_string(window_.area()));
    }
  }

  [[nodiscard]] const std::vector<ArealUnit>& units() const { return units_; }
  [[nodiscard]] const Window& window() const { return window_; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] std::size_t dimension() const { return names_.size(); }

  /// Lowest-index unit containing s (shared edges resolve to the lower index).
  [[nodiscard]] std::optional<std::size_t> unit_of(const Location& s) const {
    for (std::size_t u = 0; u < units_.size(); ++u) {
      if (units_[u].polygon.contains(s)) return u;
    }
    return std::nullopt;
  }

  [[nodiscard]] const Eigen::VectorXd& covariates_at(const Location& s) const {
    const auto u = unit_of(s);
    if (!u) {
      fail(ErrorKind::NoContainingUnit, "location (" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                                            ") lies in no areal unit");
    }
    return units_[*u].z;
  }

 private:
  std::vector<ArealUnit> units_;
  Window window_;
  std::vector<std::string> names_;
};

/// Covariates on a regular lattice. `origin` is the center of cell (0, 0);
/// cell (i, j) has center origin + (i dx, j dy). Cells whose attribute vector
/// contains a NaN are masked (outside the data region).
class GridField {
 public:
  GridField() = default;

  /// `values` is p x (nx * ny), column j * nx + i holding cell (i, j).
  GridField(Location origin, double dx, double dy, std::size_t nx, std::size_t ny, Eigen::MatrixXd values,
            std::vector<std::string> names = {})
      : origin_(origin), dx_(dx), dy_(dy), nx_(nx), ny_(ny), values_(std::move(values)), names_(std::move(names)) {
    if (!(dx_ > 0.0) || !(dy_ > 0.0)) fail(ErrorKind::Geometry, "grid cell size must be positive");
    if (nx_ == 0 || ny_ == 0) fail(ErrorKind::Geometry, "grid has no cells");
    if (static_cast<std::size_t>(values_.cols()) != nx_ * ny_) {
      fail(ErrorKind::Geometry, "grid values do not cover nx * ny cells");
    }
    if (names_.empty()) {
      for (Eigen::Index j = 0; j < values_.rows(); ++j) names_.push_back("z" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names_.size()) != values_.rows()) {
      fail(ErrorKind::Geometry, "attribute name count does not match attribute dimension");
    }
    valid_index_.assign(nx_ * ny_, -1);
    for (std::size_t c = 0; c < nx_ * ny_; ++c) {
      if (values_.col(static_cast<Eigen::Index>(c)).allFinite()) {
        valid_index_[c] = static_cast<long>(valid_cells_.size());
        valid_cells_.push_back(c);
      }
    }
    if (valid_cells_.empty()) fail(ErrorKind::Geometry, "every grid cell is masked");
    window_ = Window::rectangle(origin_.x - dx_ / 2, origin_.y - dy_ / 2, origin_.x + (nx_ - 0.5) * dx_,
                                origin_.y + (ny_ - 0.5) * dy_);
  }

  [[nodiscard]] const Location& origin() const { return origin_; }
  [[nodiscard]] double dx() const { return dx_; }
  [[nodiscard]] double dy() const { return dy_; }
  [[nodiscard]] std::size_t nx() const { return nx_; }
  [[nodiscard]] std::size_t ny() const { return ny_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] std::size_t dimension() const { return names_.size(); }
  /// Bounding rectangle of all cells, masked or not.
  [[nodiscard]] const Window& window() const { return window_; }
  [[nodiscard]] const std::vector<std::size_t>& valid_cells() const { return valid_cells_; }

  [[nodiscard]] Location cell_center(std::size_t cell) const {
    return {origin_.x + static_cast<double>(cell % nx_) * dx_, origin_.y + static_cast<double>(cell / nx_) * dy_};
  }

  /// Nearest cell center; exact ties go to the lower index along each axis.
  [[nodiscard]] std::size_t nearest_cell(const Location& s) const {
    auto axis = [](double t, std::size_t n) {
      const double k = std::ceil(t - 0.5);
      return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t i = axis((s.x - origin_.x) / dx_, nx_);
    const std::size_t j = axis((s.y - origin_.y) / dy_, ny_);
    return j * nx_ + i;
  }

  /// Index into valid_cells() of the nearest cell, or nullopt if it is masked.
  [[nodiscard]] std::optional<std::size_t> unit_of(const Location& s) const {
    const long v = valid_index_[nearest_cell(s)];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
  }

  [[nodiscard]] Eigen::VectorXd covariates_at(const Location& s) const {
    const auto cell = nearest_cell(s);
    if (valid_index_[cell] < 0) {
      fail(ErrorKind::NoContainingUnit, "location (" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                                            ") falls in a masked grid cell");
    }
    return values_.col(static_cast<Eigen::Index>(cell));
  }

 private:
  Location origin_;
  double dx_ = 1.0;
  double dy_ = 1.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
  std::vector<long> valid_index_;
  std::vector<std::size_t> valid_cells_;
  Window window_;
};

inline const Eigen::VectorXd& covariates_at(const ArealPartition& field, const Location& s) {
  return field.covariates_at(s);
}

inline Eigen::VectorXd covariates_at(const GridField& field, const Location& s) { return field.covariates_at(s); }

/// Either kind of spatial covariate source, seen as a collection of units:
/// areal units, or the unmasked cells of a grid.
class CovariateField {
 public:
  CovariateField() = default;
  CovariateField(ArealPartition partition) : impl_(std::move(partition)) {}  // NOLINT(implicit)
  CovariateField(GridField grid) : impl_(std::move(grid)) {}                 // NOLINT(implicit)

  [[nodiscard]] bool is_grid() const { return std::holds_alternative<GridField>(impl_); }
  [[nodiscard]] const ArealPartition& areal() const { return std::get<ArealPartition>(impl_); }
  [[nodiscard]] const GridField& grid() const { return std::get<GridField>(impl_); }

  [[nodiscard]] const Window& window() const {
    return std::visit([](const auto& f) -> const Window& { return f.window(); }, impl_);
  }
  [[nodiscard]] const std::vector<std::string>& names() const {
    return std::visit([](const auto& f) -> const std::vector<std::string>& { return f.names(); }, impl_);
  }
  [[nodiscard]] std::size_t dimension() const { return names().size(); }

  [[nodiscard]] std::size_t unit_count() const {
    if (is_grid()) return grid().valid_cells().size();
    return areal().units().size();
  }

  [[nodiscard]] double unit_area(std::size_t u) const {
    if (is_grid()) return grid().dx() * grid().dy();
    return areal().units()[u].polygon.area();
  }

  /// Total area covered by units (equals the window area for areal partitions).
  [[nodiscard]] double covered_area() const {
    double total = 0.0;
    for (std::size_t u = 0; u < unit_count(); ++u) total += unit_area(u);
    return total;
  }

  [[nodiscard]] Eigen::VectorXd unit_covariates(std::size_t u) const {
    if (is_grid()) return grid().values().col(static_cast<Eigen::Index>(grid().valid_cells()[u]));
    return areal().units()[u].z;
  }

  [[nodiscard]] std::optional<std::size_t> unit_of(const Location& s) const {
    if (is_grid()) {
      if (!grid().window().contains(s)) return std::nullopt;
      return grid().unit_of(s);
    }
    return areal().unit_of(s);
  }

  [[nodiscard]] Eigen::VectorXd covariates_at(const Location& s) const {
    return std::visit([&](const auto& f) -> Eigen::VectorXd { return f.covariates_at(s); }, impl_);
  }

  [[nodiscard]] Location sample_in_unit(std::size_t u, Rng& rng) const {
    if (is_grid()) {
      const auto& g = grid();
      const Location c = g.cell_center(g.valid_cells()[u]);
      std::uniform_real_distribution<double> ux(c.x - g.dx() / 2, c.x + g.dx() / 2);
      std::uniform_real_distribution<double> uy(c.y - g.dy() / 2, c.y + g.dy() / 2);
      const double x = ux(rng);
      return {x, uy(rng)};
    }
    return areal().units()[u].polygon.sample_uniform(rng);
  }

  [[nodiscard]] Location unit_interior_point(std::size_t u) const {
    if (is_grid()) return grid().cell_center(grid().valid_cells()[u]);
    return areal().units()[u].polygon.interior_point();
  }

  /// Column indices for the named attributes, in the order given.
  [[nodiscard]] std::vector<std::size_t> columns(std::span<const std::string> wanted) const {
    std::vector<std::size_t> out;
    for (const auto& w : wanted) {
      const auto& n = names();
      const auto it = std::find(n.begin(), n.end(), w);
      if (it == n.end()) fail(ErrorKind::Config, "unknown spatial covariate '" + w + "'");
      out.push_back(static_cast<std::size_t>(it - n.begin()));
    }
    return out;
  }

 private:
  std::variant<ArealPartition, GridField> impl_;
};

inline Eigen::MatrixXd pairwise_distances(std::span<const Location> locs) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = distance(locs[static_cast<std::size_t>(i)], locs[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

/// Regular grid of sites at spacing sqrt(area / target) clipped to the window.
inline std::vector<Location> regular_sites(const Window& window, std::size_t target) {
  if (target == 0) fail(ErrorKind::InvalidArgument, "site count must be positive");
  const auto& bb = window.bbox();
  double h = std::sqrt(window.area() / static_cast<double>(target));
  std::vector<Location> sites;
  // Shrink the spacing until at least one site lands inside thin windows.
  for (int attempt = 0; attempt < 60; ++attempt) {
    sites.clear();
    const auto nx = static_cast<std::size_t>(std::max(1.0, std::floor(bb.width() / h)));
    const auto ny = static_cast<std::size_t>(std::max(1.0, std::floor(bb.height() / h)));
    const double hx = bb.width() / static_cast<double>(nx);
    const double hy = bb.height() / static_cast<double>(ny);
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const Location s{bb.xmin + (i + 0.5) * hx, bb.ymin + (j + 0.5) * hy};
        if (window.contains(s)) sites.push_back(s);
      }
    }
    if (!sites.empty()) break;
    h /= 1.5;
  }
  return sites;
}

}  // namespace tscox

#endif  // TSCOX_GEOMETRY_HPP
