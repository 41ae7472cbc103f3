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

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "tscox/io.hpp"

namespace tscox {
namespace {

using testing::vec;

const Window kBox = Window::rectangle(0, 0, 10, 10);

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return {};
}

TEST(ReadPattern, TwoRows) {
  std::istringstream in("x,y,mark,nu1\n1,2,0,0.5\n3.5,4,1,0.25\n");
  const auto p = io::read_pattern(in, kBox);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.mark_kind(), MarkKind::Binary);
  EXPECT_EQ(p.nu_names(), std::vector<std::string>{"nu1"});
  EXPECT_EQ(p.events()[1].s, (Location{3.5, 4.0}));
  EXPECT_EQ(p.events()[1].nu(0), 0.25);
}

TEST(ReadPattern, MarkKinds) {
  std::istringstream cat("x,y,mark\n1,1,1\n2,2,2\n");
  EXPECT_EQ(io::read_pattern(cat, kBox).mark_kind(), MarkKind::Category);
  std::istringstream real("x,y,mark\n1,1,0.3\n");
  EXPECT_EQ(io::read_pattern(real, kBox).mark_kind(), MarkKind::Real);
  std::istringstream none("x,y\n1,1\n");
  EXPECT_EQ(io::read_pattern(none, kBox).mark_kind(), MarkKind::None);
}

TEST(ReadPattern, LogMark) {
  std::istringstream in("x,y,mark\n1,1,2.5\n2,2,1\n");
  io::PatternReadOptions opt;
  opt.log_mark = true;
  const auto p = io::read_pattern(in, kBox, opt);
  EXPECT_DOUBLE_EQ(p.events()[0].mark, std::log(2.5));
  EXPECT_EQ(p.events()[1].mark, 0.0);
  EXPECT_EQ(p.mark_kind(), MarkKind::Real);
}

TEST(ReadPattern, NonPositiveLogMarkNamesRow) {
  io::PatternReadOptions opt;
  opt.log_mark = true;
  auto read = [&] {
    std::istringstream in("x,y,mark\n1,1,2.5\n2,2,3\n3,3,0\n");
    (void)io::read_pattern(in, kBox, opt);
  };
  EXPECT_EQ(kind_of(read), ErrorKind::Domain);
  EXPECT_NE(message_of(read).find("row 3"), std::string::npos);
}

TEST(ReadPattern, MalformedRowsAreNumbered) {
  auto bad_number = [] {
    std::istringstream in("x,y,mark\n1,1,0\n2,abc,1\n");
    (void)io::read_pattern(in, kBox);
  };
  EXPECT_EQ(kind_of(bad_number), ErrorKind::Parse);
  EXPECT_NE(message_of(bad_number).find("row 2"), std::string::npos);
  auto short_row = [] {
    std::istringstream in("x,y,mark\n1,1,0\n2,2,1\n4,4\n");
    (void)io::read_pattern(in, kBox);
  };
  EXPECT_EQ(kind_of(short_row), ErrorKind::Parse);
  EXPECT_NE(message_of(short_row).find("row 3"), std::string::npos);
  auto header = [] {
    std::istringstream in("lon,lat\n1,1\n");
    (void)io::read_pattern(in, kBox);
  };
  EXPECT_EQ(kind_of(header), ErrorKind::Parse);
  auto empty = [] {
    std::istringstream in("");
    (void)io::read_pattern(in, kBox);
  };
  EXPECT_EQ(kind_of(empty), ErrorKind::Parse);
}

TEST(ReadPattern, OutsideWindowIsDomainError) {
  auto read = [] {
    std::istringstream in("x,y\n1,1\n11,1\n");
    (void)io::read_pattern(in, kBox);
  };
  EXPECT_EQ(kind_of(read), ErrorKind::Domain);
}

TEST(ReadPattern, Transpose) {
  std::istringstream in("x,y\n1,7\n");
  io::PatternReadOptions opt;
  opt.transpose = true;
  EXPECT_EQ(io::read_pattern(in, kBox, opt).events()[0].s, (Location{7, 1}));
}

TEST(PatternRoundTrip, RandomPatterns) {
  Rng rng = make_rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const MarkKind kinds[3] = {MarkKind::Binary, MarkKind::Real, MarkKind::Category};
    const MarkKind kind = kinds[trial % 3];
    const std::size_t nu = static_cast<std::size_t>(trial % 4);
    PointPattern p(kBox, kind, nu);
    const int n = 1 + static_cast<int>(uniform01(rng) * 60);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(nu));
      for (auto& x : v) x = standard_normal(rng) * 1e3;
      double mark = kind == MarkKind::Binary ? (uniform01(rng) < 0.5 ? 0.0 : 1.0)
                    : kind == MarkKind::Category ? (uniform01(rng) < 0.5 ? 1.0 : 2.0)
                                                 : standard_normal(rng) / 3.0;
      p.add(Event{{10 * uniform01(rng), 10 * uniform01(rng)}, mark, v});
    }
    std::stringstream buf;
    io::write_pattern(buf, p);
    const auto q = io::read_pattern(buf, kBox);
    ASSERT_EQ(q.size(), p.size());
    EXPECT_EQ(q.nu_names(), p.nu_names());
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(q.events()[i].s, p.events()[i].s);
      EXPECT_EQ(q.events()[i].mark, p.events()[i].mark);
      EXPECT_EQ(q.events()[i].nu, p.events()[i].nu);
    }
    std::stringstream again;
    io::write_pattern(again, q);
    std::stringstream first;
    io::write_pattern(first, p);
    EXPECT_EQ(again.str(), first.str());
  }
}

TEST(ReadGrid, InfersLatticeAndMask) {
  std::istringstream in("x,y,elev,temp\n0.5,0.5,1,10\n1.5,0.5,2,NA\n0.5,1.5,3,12\n1.5,1.5,4,13\n2.5,0.5,5,14\n2.5,1.5,6,15\n");
  const auto g = io::read_grid(in);
  EXPECT_EQ(g.nx(), 3u);
  EXPECT_EQ(g.ny(), 2u);
  EXPECT_DOUBLE_EQ(g.dx(), 1.0);
  EXPECT_EQ(g.names(), (std::vector<std::string>{"elev", "temp"}));
  EXPECT_EQ(g.valid_cells().size(), 5u);
  EXPECT_EQ(g.covariates_at({2.4, 1.2}), vec({6, 15}));
  EXPECT_EQ(kind_of([&] { (void)g.covariates_at({1.5, 0.5}); }), ErrorKind::NoContainingUnit);
}

TEST(ReadGrid, RejectsOffLatticeAndDuplicates) {
  auto off = [] {
    std::istringstream in("x,y,z\n0,0,1\n1,0,1\n2.5,0,1\n");
    (void)io::read_grid(in);
  };
  EXPECT_EQ(kind_of(off), ErrorKind::Parse);
  auto dup = [] {
    std::istringstream in("x,y,z\n0,0,1\n1,0,1\n1,0,2\n");
    (void)io::read_grid(in);
  };
  EXPECT_EQ(kind_of(dup), ErrorKind::Parse);
  EXPECT_NE(message_of(dup).find("row 3"), std::string::npos);
}

TEST(ReadGrid, RoundTripAndTranspose) {
  std::istringstream in("x,y,z\n0.5,0.5,1\n1.5,0.5,2\n0.5,1.5,3\n1.5,1.5,4\n0.5,2.5,5\n1.5,2.5,6\n");
  const auto g = io::read_grid(in);
  std::stringstream buf;
  io::write_grid(buf, g);
  const auto h = io::read_grid(buf);
  EXPECT_EQ(h.values(), g.values());
  EXPECT_EQ(h.nx(), g.nx());
  buf.clear();
  buf.seekg(0);
  const auto t = io::read_grid(buf, true);
  EXPECT_EQ(t.nx(), g.ny());
  EXPECT_EQ(t.ny(), g.nx());
  EXPECT_EQ(t.covariates_at({2.5, 0.5}), g.covariates_at({0.5, 2.5}));
}

const char* kGeoJson = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature", "properties": {"name": "west", "z1": 1.5, "z2": -1},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,2],[0,2],[0,0]]]}},
    {"type": "Feature", "properties": {"name": "east", "z1": 2.5, "z2": 3},
     "geometry": {"type": "MultiPolygon", "coordinates": [[[[1,0],[3,0],[3,2],[1,2],[1,0]]]]}}
  ]
})";

TEST(ReadAreal, FeatureCollection) {
  std::istringstream in(kGeoJson);
  const auto a = io::read_areal(in);
  EXPECT_EQ(a.names(), (std::vector<std::string>{"z1", "z2"}));
  EXPECT_EQ(a.units().size(), 2u);
  EXPECT_DOUBLE_EQ(a.window().area(), 6.0);
  EXPECT_EQ(a.covariates_at({2, 1}), vec({2.5, 3}));
  std::stringstream buf;
  io::write_areal(buf, a);
  const auto b = io::read_areal(buf);
  EXPECT_EQ(b.covariates_at({0.5, 1}), a.covariates_at({0.5, 1}));
  EXPECT_DOUBLE_EQ(b.window().area(), 6.0);
}

TEST(ReadAreal, TransposeSwapsCoordinates) {
  std::istringstream in(kGeoJson);
  const auto a = io::read_areal(in, true);
  EXPECT_EQ(a.covariates_at({1, 2}), vec({2.5, 3}));
}

TEST(ReadAreal, Errors) {
  auto bad_json = [] {
    std::istringstream in("{not json");
    (void)io::read_areal(in);
  };
  EXPECT_EQ(kind_of(bad_json), ErrorKind::Parse);
  auto missing = [] {
    std::istringstream in(R"({"type":"FeatureCollection","features":[
      {"properties":{"z":1},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}},
      {"properties":{"w":1},"geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1]]]}}]})");
    (void)io::read_areal(in);
  };
  EXPECT_EQ(kind_of(missing), ErrorKind::Parse);
  EXPECT_NE(message_of(missing).find("feature 2"), std::string::npos);
}

TEST(Artifacts, SchemeAndMatrixRoundTrip) {
  const auto field = testing::tract_partition(2, 2, 1.0, 3);
  const auto s = place_integration_points(field, 11, 4);
  std::stringstream buf;
  io::write_scheme(buf, s);
  const auto r = io::read_scheme(buf);
  ASSERT_EQ(r.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(r.points[i], s.points[i]);
    EXPECT_EQ(r.weights[i], s.weights[i]);
    EXPECT_EQ(r.unit_index[i], s.unit_index[i]);
  }
  Eigen::MatrixXd m(3, 2);
  m << 1e-300, -2.5, 0.1, 1.0 / 3.0, 7, 8;
  std::stringstream mb;
  io::write_matrix(mb, {"a", "b"}, m);
  const auto [names, back] = io::read_matrix(mb);
  EXPECT_EQ(names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(back, m);
}

TEST(Artifacts, ChainRoundTrip) {
  PosteriorChain c;
  c.names = {"beta.intercept", "sigma1", "omega1[0]", "omega1[1]"};
  c.scalar_count = 2;
  c.draws = Eigen::MatrixXd::Random(5, 4);
  std::stringstream buf;
  io::write_chain(buf, c);
  const auto r = io::read_chain(buf);
  EXPECT_EQ(r.names, c.names);
  EXPECT_EQ(r.scalar_count, 2u);
  EXPECT_EQ(r.draws, c.draws);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(std::nan("")), "NA");
  EXPECT_EQ(io::parse_number("+2.5", 1, "x"), 2.5);
  EXPECT_EQ(kind_of([] { (void)io::parse_number("inf", 4, "x"); }), ErrorKind::Parse);
}

}  // namespace
}  // namespace tscox
