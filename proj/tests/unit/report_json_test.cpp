#include <gtest/gtest.h>

#include <cmath>

#include "pqlab/report_json.hpp"

namespace pqlab {
namespace {

using nlohmann::json;

TEST(Json, NonFiniteNumbersBecomeStrings) {
  EXPECT_EQ(number(NAN), json("nan"));
  EXPECT_EQ(number(INFINITY), json("inf"));
  EXPECT_EQ(number(-INFINITY), json("-inf"));
  EXPECT_EQ(number(1.5), json(1.5));
}

TEST(Json, MatrixRows) {
  Mat z(2, 1);
  z(0, 0) = 1.0;
  z(1, 0) = -2.0;
  EXPECT_EQ(json(z), json::parse("[[1.0], [-2.0]]"));
}

TEST(Json, GapReportLayout) {
  GapReport r;
  r.inf_full = 2.0;
  r.inf_smooth = 2.5;
  r.gap = 0.5;
  r.verdict = GapVerdict::kGap;
  r.levels.push_back(GapLevel{16, 2.0, 2.5, 0.5, 1e-6, 1.0, 1.0, 1.05, 0.0, false});
  r.threshold = INFINITY;
  const json j = r;
  EXPECT_EQ(j.at("verdict"), to_string(GapVerdict::kGap));
  EXPECT_EQ(j.at("threshold"), "inf");
  EXPECT_EQ(j.at("levels").size(), 1u);
  EXPECT_EQ(j.at("levels")[0].at("resolution"), 16);
  EXPECT_DOUBLE_EQ(j.at("gap").get<double>(), 0.5);
}

TEST(Json, ConfigMirrorsFields) {
  ExperimentConfig c;
  c.command = "solve";
  c.integrand = {"p-power", {{"p", "2"}}};
  c.resolutions = {64};
  const json j = c;
  EXPECT_EQ(j.at("command"), "solve");
  EXPECT_EQ(j.at("integrand").at("name"), "p-power");
  EXPECT_EQ(j.at("integrand").at("p"), "2");
  EXPECT_EQ(j.at("resolutions"), json::array({64}));
}

TEST(Json, DumpIsIndentedWithNewline) {
  const std::string s = dump(json{{"a", 1}});
  EXPECT_EQ(s, "{\n  \"a\": 1\n}\n");
  EXPECT_EQ(json::parse(s), (json{{"a", 1}}));
}

}  // namespace
}  // namespace pqlab
