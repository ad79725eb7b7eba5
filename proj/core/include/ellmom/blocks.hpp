#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ellmom {

class RngStream;

// A collection of coordinate index sets used by the blockwise estimators.
// Indices are 0-based internally; the JSON wire format is 1-based.
class BlockCollection {
 public:
  // Validates: collection nonempty, each block nonempty, indices in [0, p),
  // no duplicate index within a block. Blocks are sorted ascending.
  BlockCollection(std::vector<std::vector<int>> blocks, int p,
                  std::string provenance);

  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int dimension() const { return p_; }
  bool overlapping() const { return overlapping_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return blocks_.size(); }
  int max_block_size() const;
  // True when the blocks partition {0, ..., p-1}.
  bool is_partition() const;

 private:
  std::vector<std::vector<int>> blocks_;
  int p_ = 0;
  bool overlapping_ = false;
  std::string provenance_;
};

// Connected components of the thresholded correlation graph of sigma_raw:
// j ~ k when |sigma_jk| / sqrt(sigma_jj * sigma_kk) > t. Every coordinate
// appears in exactly one block; components are ordered by smallest member.
BlockCollection threshold_blocks(const Eigen::MatrixXd& sigma_raw, double t);

// count distinct unordered pairs drawn uniformly without replacement from the
// p*(p-1)/2 possible pairs. Deterministic given the stream state.
BlockCollection random_pair_blocks(int p, std::int64_t count, RngStream& rng);

struct BlockDiagnostics {
  bool ok = true;
  std::vector<int> out_of_range;            // offending indices (0-based)
  std::vector<std::size_t> empty_blocks;    // positions of empty blocks
  std::vector<int> duplicates_within;       // indices repeated inside a block
  std::vector<std::pair<std::size_t, std::size_t>> overlap_pairs;
};

// Non-throwing validation used by the JSON ingestion path. Overlap makes the
// result not-ok only when require_disjoint is set.
BlockDiagnostics validate_blocks(const std::vector<std::vector<int>>& blocks,
                                 int p, bool require_disjoint);

}  // namespace ellmom
