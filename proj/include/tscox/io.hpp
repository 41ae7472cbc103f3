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

#ifndef TSCOX_IO_HPP
#define TSCOX_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"
#include "tscox/inference.hpp"
#include "tscox/integration.hpp"
#include "tscox/pattern.hpp"

/// \file
/// CSV and GeoJSON artifacts. Numbers are written in shortest round-trip
/// form, so export followed by ingest reproduces every value exactly.

namespace tscox::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// low-level helpers

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

/// Parses a number; `row` is the 1-based data row used in error messages.
inline double parse_number(std::string_view s, std::size_t row, std::string_view column, bool allow_missing = false) {
  if (allow_missing && is_missing(s)) return std::numeric_limits<double>::quiet_NaN();
  if (s.starts_with('+')) s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorKind::Parse, "row " + std::to_string(row) + ": column '" + std::string(column) + "' has value '" +
                               std::string(s) + "', expected a finite number");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based data row number of each row (blank lines are skipped).
  std::vector<std::size_t> row_numbers;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    return std::nullopt;
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!have_header) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      for (auto f : split_csv(line)) t.header.emplace_back(f);
      have_header = true;
      continue;
    }
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != t.header.size()) {
      fail(ErrorKind::Parse, "row " + std::to_string(row) + ": expected " + std::to_string(t.header.size()) +
                                 " fields, found " + std::to_string(fields.size()));
    }
    t.rows.emplace_back(fields.begin(), fields.end());
    t.row_numbers.push_back(row);
  }
  if (!have_header) fail(ErrorKind::Parse, "file is empty; a header row is required");
  return t;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

inline CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  try {
    return read_csv(in);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse) throw;
    fail(ErrorKind::Parse, path.filename().string() + ": " + e.detail());
  }
}

inline std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (j) out << ',';
    out << fields[j];
  }
  out << '\n';
}

// ---------------------------------------------------------------------------
// point patterns

struct PatternReadOptions {
  /// Replace a positive real mark by its natural log.
  bool log_mark = false;
  /// Swap the x and y columns.
  bool transpose = false;
  /// Mark kind; inferred from the values when absent.
  std::optional<MarkKind> mark_kind;
};

inline MarkKind infer_mark_kind(const std::vector<double>& marks) {
  if (marks.empty()) return MarkKind::Binary;
  const bool binary = std::all_of(marks.begin(), marks.end(), [](double m) { return m == 0.0 || m == 1.0; });
  if (binary) return MarkKind::Binary;
  const bool category = std::all_of(marks.begin(), marks.end(), [](double m) { return m == 1.0 || m == 2.0; });
  return category ? MarkKind::Category : MarkKind::Real;
}

/// Ingests CSV with header `x,y[,mark][,nu...]` into a pattern on `window`.
inline PointPattern read_pattern(std::istream& in, const Window& window, const PatternReadOptions& opt = {}) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 2 || t.header[0] != "x" || t.header[1] != "y") {
    fail(ErrorKind::Parse, "pattern header must start with x,y");
  }
  const bool has_mark = t.header.size() > 2 && t.header[2] == "mark";
  const std::size_t nu_start = has_mark ? 3 : 2;
  std::vector<std::string> nu_names(t.header.begin() + static_cast<long>(nu_start), t.header.end());
  std::vector<double> marks;
  std::vector<Event> events;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t row = t.row_numbers[i];
    Event e;
    e.s = {parse_number(r[0], row, "x"), parse_number(r[1], row, "y")};
    if (opt.transpose) std::swap(e.s.x, e.s.y);
    if (has_mark) {
      e.mark = parse_number(r[2], row, "mark");
      if (opt.log_mark) {
        if (!(e.mark > 0.0)) {
          fail(ErrorKind::Domain, "row " + std::to_string(row) + ": mark " + format_number(e.mark) +
                                      " is not positive and cannot be log-transformed");
        }
        e.mark = std::log(e.mark);
      }
      marks.push_back(e.mark);
    }
    e.nu.resize(static_cast<Eigen::Index>(nu_names.size()));
    for (std::size_t j = 0; j < nu_names.size(); ++j) {
      e.nu(static_cast<Eigen::Index>(j)) = parse_number(r[nu_start + j], row, nu_names[j]);
    }
    if (!window.contains(e.s)) {
      fail(ErrorKind::Domain, "row " + std::to_string(row) + ": event (" + format_number(e.s.x) + ", " +
                                  format_number(e.s.y) + ") lies outside the window");
    }
    events.push_back(std::move(e));
  }
  if (opt.log_mark && !has_mark) fail(ErrorKind::Config, "log-mark requested but the pattern has no mark column");
  MarkKind kind = MarkKind::None;
  if (has_mark) kind = opt.mark_kind.value_or(opt.log_mark ? MarkKind::Real : infer_mark_kind(marks));
  PointPattern p(window, kind, nu_names.size(), nu_names);
  for (auto& e : events) p.add(std::move(e));
  return p;
}

inline PointPattern read_pattern(const fs::path& path, const Window& window, const PatternReadOptions& opt = {}) {
  auto in = open_in(path);
  try {
    return read_pattern(in, window, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse && e.kind() != ErrorKind::Domain) throw;
    fail(e.kind(), path.filename().string() + ": " + e.detail());
  }
}

inline void write_pattern(std::ostream& out, const PointPattern& p) {
  std::vector<std::string> header{"x", "y"};
  const bool has_mark = p.mark_kind() != MarkKind::None;
  if (has_mark) header.emplace_back("mark");
  for (const auto& n : p.nu_names()) header.push_back(n);
  write_row(out, header);
  std::vector<std::string> row;
  for (const auto& e : p.events()) {
    row = {format_number(e.s.x), format_number(e.s.y)};
    if (has_mark) row.push_back(format_number(e.mark));
    for (Eigen::Index j = 0; j < e.nu.size(); ++j) row.push_back(format_number(e.nu(j)));
    write_row(out, row);
  }
}

inline void write_pattern(const fs::path& path, const PointPattern& p) {
  auto out = open_out(path);
  write_pattern(out, p);
}

// ---------------------------------------------------------------------------
// gridded covariates: CSV `x,y,var1,...` with one row per cell center

inline GridField read_grid(std::istream& in, bool transpose = false) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 3 || t.header[0] != "x" || t.header[1] != "y") {
    fail(ErrorKind::Parse, "grid header must be x,y followed by at least one covariate");
  }
  if (t.rows.empty()) fail(ErrorKind::Parse, "grid file has no cells");
  const std::vector<std::string> names(t.header.begin() + 2, t.header.end());
  const auto p = static_cast<Eigen::Index>(names.size());
  std::vector<Location> centers;
  std::vector<Eigen::VectorXd> vals;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t row = t.row_numbers[i];
    Location c{parse_number(r[0], row, "x"), parse_number(r[1], row, "y")};
    if (transpose) std::swap(c.x, c.y);
    centers.push_back(c);
    Eigen::VectorXd v(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      v(j) = parse_number(r[static_cast<std::size_t>(j) + 2], row, names[static_cast<std::size_t>(j)], true);
    }
    vals.push_back(std::move(v));
  }
  auto axis = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) step = std::min(step, v[i] - v[i - 1]);
    return std::pair{v, step};
  };
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& c : centers) {
    xs.push_back(c.x);
    ys.push_back(c.y);
  }
  auto [ux, dx] = axis(xs);
  auto [uy, dy] = axis(ys);
  if (!std::isfinite(dx) && !std::isfinite(dy)) fail(ErrorKind::Parse, "grid needs at least two distinct centers");
  if (!std::isfinite(dx)) dx = dy;
  if (!std::isfinite(dy)) dy = dx;
  const Location origin{ux.front(), uy.front()};
  const auto nx = static_cast<std::size_t>(std::llround((ux.back() - ux.front()) / dx)) + 1;
  const auto ny = static_cast<std::size_t>(std::llround((uy.back() - uy.front()) / dy)) + 1;
  Eigen::MatrixXd values = Eigen::MatrixXd::Constant(p, static_cast<Eigen::Index>(nx * ny),
                                                     std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(nx * ny, false);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double fi = (centers[k].x - origin.x) / dx;
    const double fj = (centers[k].y - origin.y) / dy;
    const auto i = static_cast<std::size_t>(std::llround(fi));
    const auto j = static_cast<std::size_t>(std::llround(fj));
    if (std::abs(fi - static_cast<double>(i)) > 1e-6 || std::abs(fj - static_cast<double>(j)) > 1e-6) {
      fail(ErrorKind::Parse, "row " + std::to_string(t.row_numbers[k]) + ": center is off the regular lattice");
    }
    const std::size_t cell = j * nx + i;
    if (seen[cell]) fail(ErrorKind::Parse, "row " + std::to_string(t.row_numbers[k]) + ": duplicate grid cell");
    seen[cell] = true;
    values.col(static_cast<Eigen::Index>(cell)) = vals[k];
  }
  return GridField(origin, dx, dy, nx, ny, std::move(values), names);
}

inline GridField read_grid(const fs::path& path, bool transpose = false) {
  auto in = open_in(path);
  try {
    return read_grid(in, transpose);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse) throw;
    fail(ErrorKind::Parse, path.filename().string() + ": " + e.detail());
  }
}

inline void write_grid(std::ostream& out, const GridField& g) {
  std::vector<std::string> header{"x", "y"};
  for (const auto& n : g.names()) header.push_back(n);
  write_row(out, header);
  for (std::size_t c = 0; c < g.nx() * g.ny(); ++c) {
    const Location s = g.cell_center(c);
    std::vector<std::string> row{format_number(s.x), format_number(s.y)};
    for (Eigen::Index j = 0; j < g.values().rows(); ++j) {
      row.push_back(format_number(g.values()(j, static_cast<Eigen::Index>(c))));
    }
    write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// areal covariates: GeoJSON FeatureCollection of Polygon features with
// numeric properties, plus a top-level "window" Polygon geometry.

namespace detail {

using json = nlohmann::ordered_json;

inline Polygon ring_to_polygon(const json& ring, bool transpose) {
  if (!ring.is_array() || ring.size() < 3) fail(ErrorKind::Parse, "polygon ring needs at least three positions");
  std::vector<Location> v;
  for (const auto& pos : ring) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      fail(ErrorKind::Parse, "polygon position must be [x, y]");
    }
    Location s{pos[0].get<double>(), pos[1].get<double>()};
    if (transpose) std::swap(s.x, s.y);
    v.push_back(s);
  }
  if (v.size() > 3 && v.front() == v.back()) v.pop_back();
  return Polygon(std::move(v));
}

inline Polygon geometry_to_polygon(const json& g, bool transpose) {
  if (!g.is_object() || !g.contains("type") || !g.contains("coordinates")) {
    fail(ErrorKind::Parse, "geometry must have type and coordinates");
  }
  const auto type = g["type"].get<std::string>();
  const json& c = g["coordinates"];
  if (type == "Polygon") {
    if (!c.is_array() || c.empty()) fail(ErrorKind::Parse, "Polygon has no rings");
    if (c.size() > 1) fail(ErrorKind::Geometry, "polygons with holes are not supported");
    return ring_to_polygon(c[0], transpose);
  }
  if (type == "MultiPolygon") {
    if (!c.is_array() || c.size() != 1 || c[0].size() != 1) {
      fail(ErrorKind::Geometry, "only single-part MultiPolygons without holes are supported");
    }
    return ring_to_polygon(c[0][0], transpose);
  }
  fail(ErrorKind::Parse, "unsupported geometry type '" + type + "'");
}

inline json polygon_to_geometry(const Polygon& p) {
  json ring = json::array();
  for (const auto& v : p.vertices()) ring.push_back({v.x, v.y});
  ring.push_back({p.vertices().front().x, p.vertices().front().y});
  return json{{"type", "Polygon"}, {"coordinates", json::array({ring})}};
}

}  // namespace detail

/// Reads an areal partition. Covariates are the numeric properties of the
/// first feature, in their order of appearance; other properties are ignored.
inline ArealPartition read_areal(std::istream& in, bool transpose = false) {
  detail::json doc;
  try {
    doc = detail::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array() || doc["features"].empty()) {
    fail(ErrorKind::Parse, "GeoJSON must be a FeatureCollection with at least one feature");
  }
  std::vector<std::string> names;
  const detail::json first_props = doc["features"][0].value("properties", detail::json::object());
  for (const auto& [k, v] : first_props.items()) {
    if (v.is_number()) names.push_back(k);
  }
  std::vector<ArealUnit> units;
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    ++index;
    try {
      ArealUnit u;
      u.polygon = detail::geometry_to_polygon(f.at("geometry"), transpose);
      u.z.resize(static_cast<Eigen::Index>(names.size()));
      const auto& props = f.at("properties");
      for (std::size_t j = 0; j < names.size(); ++j) {
        if (!props.contains(names[j]) || !props[names[j]].is_number()) {
          fail(ErrorKind::Parse, "property '" + names[j] + "' is missing or not numeric");
        }
        u.z(static_cast<Eigen::Index>(j)) = props[names[j]].get<double>();
      }
      units.push_back(std::move(u));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, "feature " + std::to_string(index) + ": " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), "feature " + std::to_string(index) + ": " + e.detail());
    }
  }
  Window window;
  if (doc.contains("window")) {
    window = Window(detail::geometry_to_polygon(doc["window"], transpose));
  } else {
    // Without an explicit window the units must tile their bounding box.
    BoundingBox box = units.front().polygon.bbox();
    for (const auto& u : units) box = box.merged(u.polygon.bbox());
    window = Window::rectangle(box.xmin, box.ymin, box.xmax, box.ymax);
  }
  return ArealPartition(std::move(units), std::move(window), std::move(names));
}

inline ArealPartition read_areal(const fs::path& path, bool transpose = false) {
  auto in = open_in(path);
  try {
    return read_areal(in, transpose);
  } catch (const Error& e) {
    fail(e.kind(), path.filename().string() + ": " + e.detail());
  }
}

inline void write_areal(std::ostream& out, const ArealPartition& a) {
  detail::json doc{{"type", "FeatureCollection"}};
  doc["window"] = detail::polygon_to_geometry(a.window().boundary());
  detail::json features = detail::json::array();
  for (const auto& u : a.units()) {
    detail::json props = detail::json::object();
    for (std::size_t j = 0; j < a.names().size(); ++j) props[a.names()[j]] = u.z(static_cast<Eigen::Index>(j));
    features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", detail::polygon_to_geometry(u.polygon)}});
  }
  doc["features"] = features;
  out << doc.dump(1) << '\n';
}

/// Dispatches on extension: `.geojson`/`.json` are areal, anything else a grid CSV.
inline CovariateField read_covariates(const fs::path& path, bool transpose = false) {
  const auto ext = path.extension().string();
  if (ext == ".geojson" || ext == ".json") return CovariateField(read_areal(path, transpose));
  return CovariateField(read_grid(path, transpose));
}

// ---------------------------------------------------------------------------
// integration schemes, knots and latent realizations

inline void write_scheme(std::ostream& out, const IntegrationScheme& s) {
  write_row(out, {"x", "y", "weight", "unit"});
  for (std::size_t i = 0; i < s.size(); ++i) {
    const long unit = s.unit_index.empty() ? -1 : s.unit_index[i];
    write_row(out, {format_number(s.points[i].x), format_number(s.points[i].y), format_number(s.weights[i]),
                    std::to_string(unit)});
  }
}

inline IntegrationScheme read_scheme(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header != std::vector<std::string>{"x", "y", "weight", "unit"}) {
    fail(ErrorKind::Parse, "scheme header must be x,y,weight,unit");
  }
  IntegrationScheme s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t row = t.row_numbers[i];
    s.points.push_back({parse_number(r[0], row, "x"), parse_number(r[1], row, "y")});
    s.weights.push_back(parse_number(r[2], row, "weight"));
    s.unit_index.push_back(static_cast<long>(parse_number(r[3], row, "unit")));
  }
  s.validate();
  return s;
}

inline void write_locations(std::ostream& out, std::span<const Location> locs) {
  write_row(out, {"x", "y"});
  for (const auto& s : locs) write_row(out, {format_number(s.x), format_number(s.y)});
}

inline std::vector<Location> read_locations(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 2 || t.header[0] != "x" || t.header[1] != "y") fail(ErrorKind::Parse, "header must be x,y");
  std::vector<Location> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out.push_back({parse_number(t.rows[i][0], t.row_numbers[i], "x"), parse_number(t.rows[i][1], t.row_numbers[i], "y")});
  }
  return out;
}

/// Latent values per site: `x,y,omega1[,omega2]`.
inline void write_realization(std::ostream& out, const GPRealization& gp) {
  const bool two = gp.bivariate();
  write_row(out, two ? std::vector<std::string>{"x", "y", "omega1", "omega2"} : std::vector<std::string>{"x", "y", "omega1"});
  const auto n = static_cast<Eigen::Index>(gp.locations.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = gp.locations[static_cast<std::size_t>(i)];
    std::vector<std::string> row{format_number(s.x), format_number(s.y), format_number(gp.values(i))};
    if (two) row.push_back(format_number(gp.values(n + i)));
    write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// chains and summaries

/// Chain CSV: one header row of parameter names, one row per retained sample.
inline void write_matrix(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
  write_row(out, names);
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_number(m(i, j));
    }
    line += '\n';
    out << line;
  }
}

inline std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix(std::istream& in) {
  const CsvTable t = read_csv(in);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_number(t.rows[i][j], t.row_numbers[i], t.header[j]);
    }
  }
  return {t.header, m};
}

inline void write_chain(std::ostream& out, const PosteriorChain& c) { write_matrix(out, c.names, c.draws); }

/// Reads a chain CSV; columns whose name contains '[' are knot values.
inline PosteriorChain read_chain(std::istream& in) {
  auto [names, m] = read_matrix(in);
  PosteriorChain c;
  c.names = std::move(names);
  c.draws = std::move(m);
  c.scalar_count = static_cast<std::size_t>(
      std::count_if(c.names.begin(), c.names.end(), [](const std::string& n) { return n.find('[') == std::string::npos; }));
  return c;
}

inline void write_pointwise(std::ostream& out, const Eigen::MatrixXd& pointwise) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < pointwise.cols(); ++j) names.push_back("event" + std::to_string(j + 1));
  write_matrix(out, names, pointwise);
}

inline Eigen::MatrixXd read_pointwise(std::istream& in) { return read_matrix(in).second; }

inline void write_summary(std::ostream& out, const SummaryTable& table) {
  write_row(out, {"parameter", "mean", "sd", "lower95", "upper95", "excludes_zero"});
  for (const auto& r : table) {
    write_row(out, {r.name, format_number(r.mean), format_number(r.sd), format_number(r.lower), format_number(r.upper),
                    r.excludes_zero ? "true" : "false"});
  }
}

inline void write_ranking(std::ostream& out, const std::vector<ModelScore>& scores) {
  write_row(out, {"rank", "model", "waic", "lppd", "p_waic", "events", "best"});
  for (const auto& s : scores) {
    write_row(out, {std::to_string(s.rank), s.name, format_number(s.score.waic), format_number(s.score.lppd),
                    format_number(s.score.p_waic), std::to_string(s.events), s.best ? "true" : "false"});
  }
}

inline nlohmann::ordered_json diagnostics_json(const DiagnosticsReport& rep) {
  nlohmann::ordered_json j;
  j["samples"] = rep.samples;
  j["clamped_probabilities"] = rep.clamped;
  j["parameters"] = nlohmann::ordered_json::array();
  for (const auto& p : rep.parameters) j["parameters"].push_back({{"name", p.name}, {"ess", p.ess}, {"mcse", p.mcse}});
  j["acceptance"] = nlohmann::ordered_json::array();
  for (const auto& a : rep.acceptance) {
    j["acceptance"].push_back(
        {{"block", a.name}, {"rate", a.rate()}, {"proposed", a.proposed}, {"step", a.step}});
  }
  return j;
}

}  // namespace tscox::io

#endif  // TSCOX_IO_HPP
