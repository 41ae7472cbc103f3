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

#ifndef TSCOX_PATTERN_HPP
#define TSCOX_PATTERN_HPP

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tscox/errors.hpp"
#include "tscox/geometry.hpp"

namespace tscox {

/// Binary: 0/1 marks of a logistic mark stage. Real: continuous marks.
/// Category: the mark (1 or 2) of the bivariate mark model.
enum class MarkKind { None, Binary, Real, Category };

struct Event {
  Location s;
  double mark = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd nu;
};

/// Marked events in a window, each carrying its nonspatial covariate vector.
class PointPattern {
 public:
  PointPattern() = default;

  PointPattern(Window window, MarkKind kind, std::size_t nu_dim, std::vector<std::string> nu_names = {})
      : window_(std::move(window)), kind_(kind), nu_dim_(nu_dim), nu_names_(std::move(nu_names)) {
    if (nu_names_.empty()) {
      for (std::size_t j = 0; j < nu_dim_; ++j) nu_names_.push_back("nu" + std::to_string(j + 1));
    }
    if (nu_names_.size() != nu_dim_) fail(ErrorKind::InvalidArgument, "nonspatial name count mismatch");
  }

  void add(Event e) {
    if (!window_.contains(e.s)) {
      fail(ErrorKind::Domain, "event (" + std::to_string(e.s.x) + ", " + std::to_string(e.s.y) +
                                  ") lies outside the window");
    }
    if (static_cast<std::size_t>(e.nu.size()) != nu_dim_) {
      fail(ErrorKind::InvalidArgument, "event nonspatial dimension " + std::to_string(e.nu.size()) + ", expected " +
                                           std::to_string(nu_dim_));
    }
    if (kind_ != MarkKind::None && !std::isfinite(e.mark)) fail(ErrorKind::InvalidMark, "event mark is not finite");
    events_.push_back(std::move(e));
  }

  void add(Location s, double mark, Eigen::VectorXd nu = {}) {
    if (nu.size() == 0 && nu_dim_ > 0) fail(ErrorKind::InvalidArgument, "missing nonspatial covariates");
    add(Event{s, mark, std::move(nu)});
  }

  [[nodiscard]] const std::vector<Event>& events() const { return events_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] bool empty() const { return events_.empty(); }
  [[nodiscard]] const Window& window() const { return window_; }
  [[nodiscard]] MarkKind mark_kind() const { return kind_; }
  [[nodiscard]] std::size_t nu_dim() const { return nu_dim_; }
  [[nodiscard]] const std::vector<std::string>& nu_names() const { return nu_names_; }

  [[nodiscard]] std::vector<Location> locations() const {
    std::vector<Location> out;
    out.reserve(events_.size());
    for (const auto& e : events_) out.push_back(e.s);
    return out;
  }

 private:
  Window window_;
  MarkKind kind_ = MarkKind::None;
  std::size_t nu_dim_ = 0;
  std::vector<std::string> nu_names_;
  std::vector<Event> events_;
};

}  // namespace tscox

#endif  // TSCOX_PATTERN_HPP
