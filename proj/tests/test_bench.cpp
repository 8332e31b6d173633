#include "apm/bench.hpp"

#include <gtest/gtest.h>

using namespace apm;

namespace {

bench::RunOptions small_run() {
  bench::RunOptions opt;
  opt.contract.rays = 1000;
  opt.contract.members = 1000;
  return opt;
}

}  // namespace

TEST(Bench, HashAndStem) {
  EXPECT_EQ(bench::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(bench::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  bench::BenchReport r;
  r.kind = "space";
  r.body = "ball64";
  r.dim = 2;
  r.eps_list = {0.2, 0.1};
  const std::string stem = bench::report_stem(r);
  EXPECT_EQ(stem.rfind("space_ball64_d2_", 0), 0u);
  EXPECT_EQ(stem.size(), std::string("space_ball64_d2_").size() + 16);
  r.seed = 7;
  EXPECT_NE(bench::report_stem(r), stem);
}

TEST(Bench, LoglogSlope) {
  EXPECT_NEAR(bench::loglog_slope({1, 2, 4, 8}, {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)}), 0.5, 1e-12);
  EXPECT_NEAR(bench::loglog_slope({5, 10}, {2, 0.5}), -2.0, 1e-12);
  EXPECT_THROW(bench::loglog_slope({1}, {1}), Error);
  EXPECT_THROW(bench::loglog_slope({1, 2}, {0, 1}), Error);
  EXPECT_THROW(bench::loglog_slope({2, 2}, {1, 3}), Error);
}

TEST(Bench, SpaceScalingReport) {
  const auto a = bench::run_space_scaling("ball64", 2, {0.2, 0.1}, 42, small_run());
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_TRUE(a.all_ok());
  EXPECT_EQ(a.violations(), 0);
  ASSERT_TRUE(a.slope.has_value());
  EXPECT_EQ(a.rows[1].ell, a.rows[0].ell + 1);
  for (const auto& row : a.rows) {
    EXPECT_EQ(row.mean_path, row.ell + 1);
    EXPECT_GT(row.leaf_count, 0);
    EXPECT_EQ(row.contract.rays, 1000);
  }
  const auto b = bench::run_space_scaling("ball64", 2, {0.2, 0.1}, 42, small_run());
  EXPECT_EQ(bench::to_json(a).dump(), bench::to_json(b).dump());
  EXPECT_EQ(bench::to_csv(a), bench::to_csv(b));
  const std::string plain = bench::to_json(a).dump();
  EXPECT_EQ(plain.find("seconds"), std::string::npos);
  EXPECT_NE(bench::to_json(a, true).dump().find("build_seconds"), std::string::npos);
  const std::string csv = bench::to_csv(a);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Bench, FailedBuildIsReported) {
  auto opt = small_run();
  opt.build.max_nodes = 10;
  const auto r = bench::run_space_scaling("ball64", 2, {0.2, 0.1}, 42, opt);
  EXPECT_FALSE(r.all_ok());
  EXPECT_FALSE(r.slope.has_value());
  EXPECT_NE(r.rows[0].status.find("node budget"), std::string::npos);
  EXPECT_EQ(bench::to_json(r)["slope"], nullptr);
}

TEST(Bench, QueryContract) {
  const auto r = bench::run_query_contract("random", 2, 0.05, 2000, 42);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].status, "ok");
  EXPECT_EQ(r.violations(), 0);
  const auto& c = r.rows[0].contract;
  EXPECT_EQ(c.rays, 2000);
  EXPECT_EQ(c.members, 2000);
  EXPECT_GT(c.band, 0);
  EXPECT_LE(c.max_distance, 0.05 + 1e-6);
}
