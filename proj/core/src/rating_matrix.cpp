#include "recpipe/rating_matrix.hpp"

#include <algorithm>

namespace recpipe {

RatingMatrix RatingMatrix::build(std::span<const Event> events, std::size_t num_users,
                                 std::size_t num_items) {
  RatingMatrix m;
  m.num_users = num_users;
  m.num_items = num_items;
  m.num_events = events.size();
  m.user_profiles.resize(num_users);
  m.item_profiles.resize(num_items);
  m.item_counts.assign(num_items, 0);
  for (const auto& ev : events) {
    m.user_profiles[ev.user].emplace_back(ev.item, ev.rating);
    m.item_profiles[ev.item].emplace_back(ev.user, ev.rating);
    m.item_counts[ev.item]++;
  }
  for (auto& profile : m.user_profiles) {
    std::sort(profile.begin(), profile.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.first < b.first; });
  }
  for (auto& profile : m.item_profiles) {
    std::sort(profile.begin(), profile.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.first < b.first; });
  }
  return m;
}

bool RatingMatrix::user_has_item(std::uint32_t user, std::uint32_t item) const {
  const auto& profile = user_profiles[user];
  const auto it = std::lower_bound(
      profile.begin(), profile.end(), item,
      [](const SparseEntry& e, std::uint32_t value) { return e.first < value; });
  return it != profile.end() && it->first == item;
}

}  // namespace recpipe
