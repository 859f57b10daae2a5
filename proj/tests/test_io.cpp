#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "sbc/integrator.hpp"
#include "sbc/io.hpp"

using namespace sbc;

namespace {
std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string first_lines(const std::string& text, int n) {
  std::size_t pos = 0;
  for (int i = 0; i < n && pos != std::string::npos; ++i) {
    pos = text.find('\n', pos);
    if (pos != std::string::npos) ++pos;
  }
  return text.substr(0, pos);
}
}  // namespace

TEST(Csv, Formatting) {
  EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(io::fmt(-0.0), "0");
  EXPECT_EQ(io::fmt(std::nan("")), "nan");
  EXPECT_EQ(io::fmt(1e-300), "1e-300");
  EXPECT_EQ(io::fmt(-2.5), "-2.5");
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, TrajectoryGoldenHead) {
  std::ostringstream os;
  io::write_trajectory_csv(os, integrate_span(0.5, 1.0, 5));
  EXPECT_EQ(first_lines(os.str(), 2), read_file(std::string(SBC_GOLDEN_DIR) + "/trajectory_head.csv"));
}

TEST(Csv, TrajectoryIsDeterministic) {
  std::ostringstream a, b;
  io::write_trajectory_csv(a, integrate_span(0.64, 3.0, 50));
  io::write_trajectory_csv(b, integrate_span(0.64, 3.0, 50));
  EXPECT_EQ(a.str(), b.str());
  // Header plus one line per sample.
  const auto text = a.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 51);
}

TEST(Csv, SweepRows) {
  std::vector<SweepRecord> rows(2);
  rows[0] = {6, 0.25, -1.5, 0.75, ""};
  rows[1].theta = 0.5;
  rows[1].error = "bodies 2 and 3, collided";
  std::ostringstream os;
  io::write_sweep_csv(os, rows);
  EXPECT_EQ(os.str(),
            "n,theta,signed_magnitude,t_collision,error\n"
            "6,0.25,-1.5,0.75,\n"
            "4,0.5,nan,nan,\"bodies 2 and 3, collided\"\n");
}

TEST(Csv, Bracket) {
  std::ostringstream os;
  io::write_bracket_csv(os, {{0.0, 1.0}, {0.5, 1.0}});
  EXPECT_EQ(os.str(), "iteration,lo,hi\n0,0,1\n1,0.5,1\n");
}

TEST(Json, ShootingResultAndManifest) {
  ShootingResult r;
  r.theta_star = 0.4;
  r.v_star = theta_to_v(0.4);
  r.s0 = std::nan("");
  r.bracket_history = {{0.3, 0.5}};
  const auto j = io::to_json(r);
  EXPECT_EQ(j["theta_star"], 0.4);
  EXPECT_TRUE(j["s0"].is_null());
  EXPECT_EQ(j["final_bracket"][1], 0.5);

  io::RunManifest m;
  m.command = "sweep";
  m.parameters["grid"] = 99;
  m.outputs = {"sweep.csv"};
  const auto mj = m.to_json();
  for (const char* key : {"command", "parameters", "tool_version", "schemas", "outputs", "timing"}) {
    EXPECT_TRUE(mj.contains(key)) << key;
  }
  EXPECT_EQ(mj["schemas"]["sweep"], "sbc-sweep/1");
  m.wall_seconds = 3;
  auto mj2 = m.to_json();
  mj2.erase("timing");
  auto mj1 = mj;
  mj1.erase("timing");
  EXPECT_EQ(mj1, mj2);
}

TEST(Svg, Structure) {
  io::Series a{"one", {0, 1, 2}, {0, 1, 4}, ""};
  io::Series b{"two <b>", {0, 1}, {std::nan(""), 2}, ""};
  const auto svg = io::render_svg({"t", "x", "y", false, true}, {a, b});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t count = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(svg.find("two &lt;b&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  // Empty input still renders a frame.
  EXPECT_NE(io::render_svg({}, {}).find("</svg>"), std::string::npos);
}
