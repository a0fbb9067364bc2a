#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recpipe {

// One (user, item, rating, optional timestamp) feedback event. External ids
// are opaque strings so any dataset can be loaded without renumbering.
struct Interaction {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

// Dense mirror of an interaction against a Dataset's vocabularies; used by
// splitting and models. `timestamp` is meaningful only if `has_timestamp`.
struct Event {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
  bool has_timestamp = false;

  bool operator==(const Event&) const = default;
};

// Immutable indexed interaction store. Construction deduplicates (user, item)
// pairs -- the event with the greatest timestamp wins, ties and missing
// timestamps resolve to the last occurrence -- and assigns dense contiguous
// ids in order of first appearance. Shareable across threads once built.
class Dataset {
 public:
  Dataset() = default;

  static Dataset from_interactions(std::vector<Interaction> rows);

  const std::vector<Interaction>& interactions() const { return interactions_; }
  const std::vector<Event>& events() const { return events_; }

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }

  // catalog = every indexed item.
  std::size_t catalog_size() const { return item_ids_.size(); }

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  std::optional<std::uint32_t> user_index(std::string_view id) const;
  std::optional<std::uint32_t> item_index(std::string_view id) const;

  // Interaction count per dense item id; sums to size().
  const std::vector<std::uint32_t>& item_popularity() const { return item_popularity_; }
  // Interaction count per dense user id (profile sizes).
  const std::vector<std::uint32_t>& user_profile_size() const { return user_profile_size_; }

  bool all_have_timestamps() const { return all_have_timestamps_; }

  // Item attribute sets (dense feature ids, sorted); empty when no side
  // information was attached.
  bool has_attributes() const { return !feature_ids_.empty(); }
  const std::vector<std::vector<std::uint32_t>>& item_features() const { return item_features_; }
  const std::vector<std::string>& feature_ids() const { return feature_ids_; }

  // Copies the attribute sets of a source dataset onto this one (matched by
  // external item id); used when filtering rebuilds the vocabulary.
  void inherit_attributes(const Dataset& source);

  double density() const;

 private:
  std::vector<Interaction> interactions_;
  std::vector<Event> events_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::uint32_t> user_index_;
  std::unordered_map<std::string, std::uint32_t> item_index_;
  std::vector<std::uint32_t> item_popularity_;
  std::vector<std::uint32_t> user_profile_size_;
  bool all_have_timestamps_ = false;

  std::vector<std::vector<std::uint32_t>> item_features_;
  std::vector<std::string> feature_ids_;

  friend Dataset load_attributes(const Dataset&, const std::filesystem::path&);
};

// Reads interaction TSV: `user \t item \t rating [\t timestamp]`, no header,
// UTF-8, LF or CRLF. Raises DataError with line numbers on malformed rows
// and when the file yields no interactions.
std::vector<Interaction> read_interactions_tsv(const std::filesystem::path& path);
Dataset load_interactions(const std::filesystem::path& path);

// Attaches `item \t feature [\t feature ...]` side information. Items without
// any feature are dropped together with their interactions and the dataset is
// re-indexed. A file that covers zero known items is a fatal mismatch.
Dataset load_attributes(const Dataset& dataset, const std::filesystem::path& path);

// Cluster file `entity \t cluster` used by the fairness metrics.
std::unordered_map<std::string, std::string> load_cluster_map(const std::filesystem::path& path);

// Writes events back to interaction TSV (used by --dump-splits).
void write_events_tsv(const std::filesystem::path& path, const Dataset& base,
                      const std::vector<Event>& events);

}  // namespace recpipe
