#include "ellmom/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "ellmom/rng.hpp"

namespace ellmom {

BlockCollection::BlockCollection(std::vector<std::vector<int>> blocks, int p,
                                 std::string provenance)
    : blocks_(std::move(blocks)), p_(p), provenance_(std::move(provenance)) {
  if (p_ < 1) throw std::invalid_argument("BlockCollection: p must be >= 1");
  if (blocks_.empty())
    throw std::invalid_argument("BlockCollection: collection is empty");
  std::vector<char> seen(static_cast<std::size_t>(p_), 0);
  for (auto& block : blocks_) {
    if (block.empty())
      throw std::invalid_argument("BlockCollection: empty block");
    std::sort(block.begin(), block.end());
    for (std::size_t i = 0; i < block.size(); ++i) {
      int idx = block[i];
      if (idx < 0 || idx >= p_)
        throw std::out_of_range("BlockCollection: index out of range");
      if (i > 0 && block[i - 1] == idx)
        throw std::invalid_argument("BlockCollection: duplicate index in block");
      if (seen[static_cast<std::size_t>(idx)]) overlapping_ = true;
      seen[static_cast<std::size_t>(idx)] = 1;
    }
  }
}

int BlockCollection::max_block_size() const {
  std::size_t best = 0;
  for (const auto& block : blocks_) best = std::max(best, block.size());
  return static_cast<int>(best);
}

bool BlockCollection::is_partition() const {
  if (overlapping_) return false;
  std::size_t covered = 0;
  for (const auto& block : blocks_) covered += block.size();
  return covered == static_cast<std::size_t>(p_);
}

BlockCollection threshold_blocks(const Eigen::MatrixXd& sigma_raw, double t) {
  if (sigma_raw.rows() != sigma_raw.cols())
    throw std::invalid_argument("threshold_blocks: matrix must be square");
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("threshold_blocks: t must be in [0, 1]");
  const int p = static_cast<int>(sigma_raw.rows());
  if (p < 1) throw std::invalid_argument("threshold_blocks: empty matrix");
  Eigen::VectorXd scale(p);
  for (int j = 0; j < p; ++j) {
    double d = sigma_raw(j, j);
    if (!(d > 0.0))
      throw std::invalid_argument(
          "threshold_blocks: diagonal entries must be positive");
    scale(j) = std::sqrt(d);
  }

  std::vector<int> component(static_cast<std::size_t>(p), -1);
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < p; ++start) {
    if (component[static_cast<std::size_t>(start)] >= 0) continue;
    int comp_id = static_cast<int>(blocks.size());
    std::vector<int> members;
    std::queue<int> frontier;
    frontier.push(start);
    component[static_cast<std::size_t>(start)] = comp_id;
    while (!frontier.empty()) {
      int j = frontier.front();
      frontier.pop();
      members.push_back(j);
      for (int k = 0; k < p; ++k) {
        if (component[static_cast<std::size_t>(k)] >= 0) continue;
        double corr = std::abs(sigma_raw(j, k)) / (scale(j) * scale(k));
        if (corr > t) {
          component[static_cast<std::size_t>(k)] = comp_id;
          frontier.push(k);
        }
      }
    }
    std::sort(members.begin(), members.end());
    blocks.push_back(std::move(members));
  }
  return BlockCollection(std::move(blocks), p,
                         "threshold(t=" + std::to_string(t) + ")");
}

namespace {

std::uint64_t uniform_below(RngStream& rng, std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  std::uint64_t reject_below = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = rng.next_u64();
    if (x >= reject_below) return x % bound;
  }
}

// Lexicographic rank -> (i, j) with i < j over p coordinates.
std::pair<int, int> decode_pair(std::uint64_t rank, int p) {
  double pd = static_cast<double>(p);
  double disc = (2.0 * pd - 1.0) * (2.0 * pd - 1.0) -
                8.0 * static_cast<double>(rank);
  int i = static_cast<int>((2.0 * pd - 1.0 - std::sqrt(std::max(disc, 0.0))) / 2.0);
  i = std::clamp(i, 0, p - 2);
  auto offset = [pd](int a) {
    return static_cast<std::uint64_t>(a) *
           static_cast<std::uint64_t>(2.0 * pd - a - 1.0) / 2;
  };
  while (i > 0 && offset(i) > rank) --i;
  while (i < p - 2 && offset(i + 1) <= rank) ++i;
  int j = i + 1 + static_cast<int>(rank - offset(i));
  return {i, j};
}

}  // namespace

BlockCollection random_pair_blocks(int p, std::int64_t count, RngStream& rng) {
  if (p < 2) throw std::invalid_argument("random_pair_blocks: p must be >= 2");
  std::uint64_t total =
      static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;
  if (count < 1 || static_cast<std::uint64_t>(count) > total)
    throw std::invalid_argument(
        "random_pair_blocks: count must be in [1, p*(p-1)/2]");

  // Sparse Fisher-Yates over pair ranks; memory is O(count).
  std::unordered_map<std::uint64_t, std::uint64_t> moved;
  auto value_at = [&moved](std::uint64_t idx) {
    auto it = moved.find(idx);
    return it == moved.end() ? idx : it->second;
  };
  std::vector<std::vector<int>> blocks;
  blocks.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t d = 0; d < static_cast<std::uint64_t>(count); ++d) {
    std::uint64_t u = d + uniform_below(rng, total - d);
    std::uint64_t chosen = value_at(u);
    moved[u] = value_at(d);
    auto [i, j] = decode_pair(chosen, p);
    blocks.push_back({i, j});
  }
  return BlockCollection(std::move(blocks), p,
                         "pairs(count=" + std::to_string(count) + ")");
}

BlockDiagnostics validate_blocks(const std::vector<std::vector<int>>& blocks,
                                 int p, bool require_disjoint) {
  BlockDiagnostics diag;
  std::vector<int> owner(static_cast<std::size_t>(std::max(p, 0)), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) {
      diag.empty_blocks.push_back(b);
      diag.ok = false;
      continue;
    }
    std::vector<int> sorted = blocks[b];
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      int idx = sorted[i];
      if (idx < 0 || idx >= p) {
        diag.out_of_range.push_back(idx);
        diag.ok = false;
        continue;
      }
      if (i > 0 && sorted[i - 1] == idx) {
        diag.duplicates_within.push_back(idx);
        diag.ok = false;
      }
      int prev = owner[static_cast<std::size_t>(idx)];
      if (prev >= 0 && prev != static_cast<int>(b)) {
        diag.overlap_pairs.emplace_back(static_cast<std::size_t>(prev), b);
        if (require_disjoint) diag.ok = false;
      }
      owner[static_cast<std::size_t>(idx)] = static_cast<int>(b);
    }
  }
  if (blocks.empty()) diag.ok = false;
  return diag;
}

}  // namespace ellmom
