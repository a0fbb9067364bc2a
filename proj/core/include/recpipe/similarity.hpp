#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recpipe {

// Sparse profile entry: (dense index, value), sorted by index, unique.
using SparseEntry = std::pair<std::uint32_t, double>;
using SparseVec = std::span<const SparseEntry>;

enum class SimilarityKind {
  Cosine,
  Jaccard,
  Dice,
  Pearson,
  Euclidean,
  Manhattan,
  BrayCurtis,
  AdjustedCosine,
};

std::optional<SimilarityKind> parse_similarity(std::string_view name);
std::string_view similarity_name(SimilarityKind kind);
const std::vector<std::string>& similarity_names();

// Pairwise kernel over a shared dense index space. Degenerate inputs (zero
// norms, fewer than two co-rated entries for pearson, zero denominators)
// return 0 rather than erroring so kNN can tolerate empty profiles.
// `index_offsets`, when non-empty, is subtracted per index before the cosine
// is taken (adjusted_cosine with per-user means); other kinds ignore it.
double similarity(SimilarityKind kind, SparseVec x, SparseVec y,
                  std::span<const double> index_offsets = {});

}  // namespace recpipe
