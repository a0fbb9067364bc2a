#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recpipe/dataset.hpp"
#include "recpipe/similarity.hpp"

namespace recpipe {

// Sparse user-item rating matrix over the base dataset's vocabularies, built
// from one fold's training events. Both orientations are materialised since
// the kNN models walk rows and columns interchangeably.
struct RatingMatrix {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_events = 0;
  // per user: (item, rating) sorted by item
  std::vector<std::vector<SparseEntry>> user_profiles;
  // per item: (user, rating) sorted by user
  std::vector<std::vector<SparseEntry>> item_profiles;
  // training interaction count per item
  std::vector<std::uint32_t> item_counts;

  static RatingMatrix build(std::span<const Event> events, std::size_t num_users,
                            std::size_t num_items);

  bool user_has_item(std::uint32_t user, std::uint32_t item) const;
};

}  // namespace recpipe
