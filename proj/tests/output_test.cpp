#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlspec/output.hpp"

using namespace nlspec;

TEST(Num, RoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(num(v)), v);
  EXPECT_EQ(num(-0.0), "0");
  EXPECT_EQ(num(true), "1");
}

TEST(Table, QuotesFieldsAndWritesMetadata) {
  Table t;
  t.note("domain", "box2(0,0,1,1)");
  t.note("h", 0.5);
  t.header = {"a", "b"};
  t.rows.push_back({"x\"y", "1"});
  EXPECT_EQ(t.csv(), "# domain,\"box2(0,0,1,1)\"\n# h,0.5\na,b\n\"x\"\"y\",1\n");
}

TEST(Plot, SinglePointGivesOneMarker) {
  const std::string svg = render_plot({{"s", {1.0}, {2.0}}}, {"t", "x", "y"});
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  std::size_t markers = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++markers;
  EXPECT_EQ(markers, 1u);
}

TEST(Plot, DeterministicAndEscaped) {
  const std::vector<Series> s{{"a<b", {1, 2, 3}, {3, 2, 1}}, {"c", {1, 2}, {0, 1}}};
  const std::string a = render_plot(s, {"t&t", "x", "y"});
  EXPECT_EQ(a, render_plot(s, {"t&t", "x", "y"}));
  EXPECT_NE(a.find("a&lt;b"), std::string::npos);
  EXPECT_NE(a.find("t&amp;t"), std::string::npos);
}

TEST(Plot, EmptyInputIsAnError) {
  try {
    render_plot({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.invariant(), "nonempty_series");
  }
  EXPECT_THROW(render_plot({{"bad", {1, 2}, {1}}}, {}), Error);
}

TEST(WriteAtomic, LeavesNoTemporary) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "nlspec_atomic";
  std::filesystem::create_directories(dir);
  write_atomic(dir / "a.csv", "x\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "a.csv.tmp"));
  std::ifstream in(dir / "a.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "x\n");
  EXPECT_THROW(write_atomic(dir / "missing" / "b.csv", "x"), Error);
}
