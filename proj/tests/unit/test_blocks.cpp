#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "ellmom/blocks.hpp"
#include "ellmom/elliptical.hpp"
#include "ellmom/rng.hpp"

using namespace ellmom;

namespace {

// every block of `fine` sits inside some block of `coarse`
bool refines(const BlockCollection& fine, const BlockCollection& coarse) {
  for (const auto& fb : fine.blocks()) {
    bool contained = false;
    for (const auto& cb : coarse.blocks()) {
      if (std::includes(cb.begin(), cb.end(), fb.begin(), fb.end())) {
        contained = true;
        break;
      }
    }
    if (!contained) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("blocks");

TEST_CASE("collection construction") {
  BlockCollection c({{2, 0}, {1}}, 3, "manual");
  CHECK(c.size() == 2);
  CHECK(c.blocks()[0] == std::vector<int>{0, 2});  // sorted on ingest
  CHECK(c.dimension() == 3);
  CHECK(c.max_block_size() == 2);
  CHECK(c.is_partition());
  CHECK_FALSE(c.overlapping());
  CHECK(c.provenance() == "manual");

  BlockCollection overlap({{0, 1}, {1, 2}}, 3, "manual");
  CHECK(overlap.overlapping());
  CHECK_FALSE(overlap.is_partition());

  BlockCollection partial({{0}, {2}}, 3, "manual");
  CHECK_FALSE(partial.is_partition());  // coordinate 1 uncovered

  CHECK_THROWS_AS(BlockCollection({}, 3, "x"), std::invalid_argument);
  CHECK_THROWS_AS(BlockCollection({{0}, {}}, 3, "x"), std::invalid_argument);
  CHECK_THROWS_AS(BlockCollection({{0, 3}}, 3, "x"), std::out_of_range);
  CHECK_THROWS_AS(BlockCollection({{-1}}, 3, "x"), std::out_of_range);
  CHECK_THROWS_AS(BlockCollection({{1, 1}}, 3, "x"), std::invalid_argument);
}

TEST_CASE("threshold blocks") {
  // banded correlations: adjacent entries 0.5 chain everything together when
  // the threshold sits below 0.5 and nothing when above
  Eigen::MatrixXd band = covariance_banded(5, 0.5);
  BlockCollection chained = threshold_blocks(band, 0.4);
  CHECK(chained.size() == 1);
  CHECK(chained.blocks()[0] == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(chained.is_partition());

  BlockCollection singles = threshold_blocks(band, 0.6);
  CHECK(singles.size() == 5);
  for (std::size_t b = 0; b < 5; ++b)
    CHECK(singles.blocks()[b].size() == 1);

  Eigen::MatrixXd bd = covariance_block_diag(5, 2, 0.7);
  BlockCollection groups = threshold_blocks(bd, 0.5);
  REQUIRE(groups.size() == 3);
  CHECK(groups.blocks()[0] == std::vector<int>{0, 1});
  CHECK(groups.blocks()[1] == std::vector<int>{2, 3});
  CHECK(groups.blocks()[2] == std::vector<int>{4});

  // thresholding acts on correlations, so rescaling variances changes nothing
  Eigen::VectorXd d(5);
  d << 4.0, 9.0, 16.0, 25.0, 0.04;
  Eigen::MatrixXd scaled =
      d.cwiseSqrt().asDiagonal() * bd * d.cwiseSqrt().asDiagonal();
  BlockCollection groups_scaled = threshold_blocks(scaled, 0.5);
  REQUIRE(groups_scaled.size() == groups.size());
  for (std::size_t b = 0; b < groups.size(); ++b)
    CHECK(groups_scaled.blocks()[b] == groups.blocks()[b]);

  // identity stays fully separated even at t = 0 (comparison is strict)
  BlockCollection id_blocks = threshold_blocks(covariance_identity(4), 0.0);
  CHECK(id_blocks.size() == 4);

  CHECK(chained.provenance().rfind("threshold(", 0) == 0);

  Eigen::MatrixXd zero_diag = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS((void)threshold_blocks(zero_diag, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)threshold_blocks(band, 1.5), std::invalid_argument);
  CHECK_THROWS_AS((void)threshold_blocks(Eigen::MatrixXd::Ones(2, 3), 0.5),
                  std::invalid_argument);
}

TEST_CASE("threshold refinement in t") {
  // raising the threshold can only split components, never merge them
  const int p = 12;
  EllipticalSpec spec(Eigen::VectorXd::Zero(p), covariance_banded(p, 0.6),
                      RadialFamily{GaussianRadial{}});
  RngStream rng(31, 0);
  SampleMatrix y = sample(spec, 60, rng);
  Eigen::MatrixXd centered = y.data.rowwise() - y.data.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / 60.0;

  std::vector<double> grid = {0.05, 0.2, 0.5, 0.8};
  for (std::size_t a = 0; a + 1 < grid.size(); ++a) {
    BlockCollection coarse = threshold_blocks(cov, grid[a]);
    BlockCollection fine = threshold_blocks(cov, grid[a + 1]);
    CHECK(coarse.is_partition());
    CHECK(fine.is_partition());
    CHECK(fine.size() >= coarse.size());
    CHECK(refines(fine, coarse));
  }
}

TEST_CASE("random pair draws") {
  RngStream rng(7, 0);
  BlockCollection one = random_pair_blocks(2, 1, rng);
  CHECK(one.size() == 1);
  CHECK(one.blocks()[0] == std::vector<int>{0, 1});
  CHECK(one.provenance() == "pairs(count=1)");

  // exhaustive draw enumerates every pair exactly once
  RngStream rng2(7, 1);
  BlockCollection all = random_pair_blocks(6, 15, rng2);
  REQUIRE(all.size() == 15);
  std::set<std::pair<int, int>> seen;
  for (const auto& b : all.blocks()) {
    REQUIRE(b.size() == 2);
    CHECK(b[0] < b[1]);
    CHECK(b[0] >= 0);
    CHECK(b[1] < 6);
    seen.insert({b[0], b[1]});
  }
  CHECK(seen.size() == 15);

  // partial draw without replacement: all distinct, in range
  RngStream rng3(7, 2);
  BlockCollection some = random_pair_blocks(30, 200, rng3);
  REQUIRE(some.size() == 200);
  std::set<std::pair<int, int>> distinct;
  for (const auto& b : some.blocks()) {
    REQUIRE(b.size() == 2);
    CHECK(b[1] < 30);
    distinct.insert({b[0], b[1]});
  }
  CHECK(distinct.size() == 200);

  // identical stream settings reproduce the draw
  RngStream ra(99, 5), rb(99, 5);
  BlockCollection da = random_pair_blocks(20, 50, ra);
  BlockCollection db = random_pair_blocks(20, 50, rb);
  bool identical = da.size() == db.size();
  for (std::size_t i = 0; identical && i < da.size(); ++i)
    identical = da.blocks()[i] == db.blocks()[i];
  CHECK(identical);

  // single draws are roughly uniform over the 10 pairs of p = 5
  std::vector<int> freq(10, 0);
  for (int r = 0; r < 4000; ++r) {
    RngStream rr(123, static_cast<std::uint64_t>(r));
    BlockCollection draw = random_pair_blocks(5, 1, rr);
    int i = draw.blocks()[0][0], j = draw.blocks()[0][1];
    int rank = i * (2 * 5 - i - 1) / 2 + (j - i - 1);
    ++freq[static_cast<std::size_t>(rank)];
  }
  for (int f : freq) {
    CHECK(f > 300);
    CHECK(f < 500);
  }

  RngStream re(1, 1);
  CHECK_THROWS_AS((void)random_pair_blocks(1, 1, re), std::invalid_argument);
  CHECK_THROWS_AS((void)random_pair_blocks(5, 0, re), std::invalid_argument);
  CHECK_THROWS_AS((void)random_pair_blocks(5, 11, re), std::invalid_argument);
}

TEST_CASE("validation diagnostics") {
  auto ok = validate_blocks({{0, 1}, {2}}, 3, true);
  CHECK(ok.ok);
  CHECK(ok.overlap_pairs.empty());

  auto oor = validate_blocks({{0, 5}, {-2}}, 3, false);
  CHECK_FALSE(oor.ok);
  REQUIRE(oor.out_of_range.size() == 2);
  CHECK(oor.out_of_range[0] == 5);
  CHECK(oor.out_of_range[1] == -2);

  auto empty = validate_blocks({{0}, {}}, 3, false);
  CHECK_FALSE(empty.ok);
  REQUIRE(empty.empty_blocks.size() == 1);
  CHECK(empty.empty_blocks[0] == 1);

  auto dup = validate_blocks({{1, 1, 2}}, 3, false);
  CHECK_FALSE(dup.ok);
  REQUIRE(dup.duplicates_within.size() == 1);
  CHECK(dup.duplicates_within[0] == 1);

  // overlap is reported always, fatal only when disjointness is required
  auto overlap_soft = validate_blocks({{0, 1}, {1, 2}}, 3, false);
  CHECK(overlap_soft.ok);
  REQUIRE(overlap_soft.overlap_pairs.size() == 1);
  CHECK(overlap_soft.overlap_pairs[0] == std::make_pair(std::size_t{0},
                                                        std::size_t{1}));
  auto overlap_hard = validate_blocks({{0, 1}, {1, 2}}, 3, true);
  CHECK_FALSE(overlap_hard.ok);

  CHECK_FALSE(validate_blocks({}, 3, false).ok);
}

TEST_SUITE_END();
