#include "recpipe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"

namespace recpipe {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_rating(std::string_view field, const std::filesystem::path& path, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": unparsable rating '" +
                    std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_timestamp(std::string_view field, const std::filesystem::path& path,
                             std::size_t line_no) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": unparsable timestamp '" +
                    std::string(field) + "'");
  }
  return value;
}

}  // namespace

Dataset Dataset::from_interactions(std::vector<Interaction> rows) {
  // Deduplicate keeping the row with the greatest timestamp (missing counts
  // as smallest); on ties the later row wins. The surviving row stays at the
  // position of the pair's first appearance so indexing is file-order stable.
  std::unordered_map<std::string, std::size_t> seen;  // "user\titem" -> slot
  std::vector<Interaction> unique;
  unique.reserve(rows.size());
  for (auto& row : rows) {
    std::string key = row.user + '\t' + row.item;
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(std::move(key), unique.size());
      unique.push_back(std::move(row));
      continue;
    }
    Interaction& kept = unique[it->second];
    const std::int64_t kept_ts = kept.timestamp.value_or(INT64_MIN);
    const std::int64_t new_ts = row.timestamp.value_or(INT64_MIN);
    if (new_ts >= kept_ts) {
      kept.rating = row.rating;
      kept.timestamp = row.timestamp;
    }
  }

  Dataset ds;
  ds.interactions_ = std::move(unique);
  ds.events_.reserve(ds.interactions_.size());
  ds.all_have_timestamps_ = !ds.interactions_.empty();
  for (const auto& row : ds.interactions_) {
    Event ev;
    auto uit = ds.user_index_.find(row.user);
    if (uit == ds.user_index_.end()) {
      uit = ds.user_index_.emplace(row.user, static_cast<std::uint32_t>(ds.user_ids_.size())).first;
      ds.user_ids_.push_back(row.user);
      ds.user_profile_size_.push_back(0);
    }
    auto iit = ds.item_index_.find(row.item);
    if (iit == ds.item_index_.end()) {
      iit = ds.item_index_.emplace(row.item, static_cast<std::uint32_t>(ds.item_ids_.size())).first;
      ds.item_ids_.push_back(row.item);
      ds.item_popularity_.push_back(0);
    }
    ev.user = uit->second;
    ev.item = iit->second;
    ev.rating = row.rating;
    if (row.timestamp) {
      ev.timestamp = *row.timestamp;
      ev.has_timestamp = true;
    } else {
      ds.all_have_timestamps_ = false;
    }
    ds.user_profile_size_[ev.user]++;
    ds.item_popularity_[ev.item]++;
    ds.events_.push_back(ev);
  }
  return ds;
}

std::optional<std::uint32_t> Dataset::user_index(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Dataset::item_index(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

void Dataset::inherit_attributes(const Dataset& source) {
  if (!source.has_attributes()) return;
  feature_ids_ = source.feature_ids_;
  item_features_.assign(num_items(), {});
  for (std::uint32_t item = 0; item < num_items(); ++item) {
    const auto src = source.item_index(item_ids_[item]);
    if (src) item_features_[item] = source.item_features_[*src];
  }
}

double Dataset::density() const {
  if (user_ids_.empty() || item_ids_.empty()) return 0.0;
  return static_cast<double>(interactions_.size()) /
         (static_cast<double>(user_ids_.size()) * static_cast<double>(item_ids_.size()));
}

std::vector<Interaction> read_interactions_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interaction file: " + path.string());
  std::vector<Interaction> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 or 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    Interaction row;
    row.user = std::string(fields[0]);
    row.item = std::string(fields[1]);
    if (row.user.empty() || row.item.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty user or item id");
    }
    row.rating = parse_rating(fields[2], path, line_no);
    if (fields.size() == 4) row.timestamp = parse_timestamp(fields[3], path, line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

Dataset load_interactions(const std::filesystem::path& path) {
  Dataset ds = Dataset::from_interactions(read_interactions_tsv(path));
  if (ds.empty()) throw DataError("empty dataset: " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %zu users, %zu items, %zu interactions, density %.6f",
                path.filename().string().c_str(), ds.num_users(), ds.num_items(), ds.size(),
                ds.density());
  log_line(Stage::Load, buf);
  return ds;
}

Dataset load_attributes(const Dataset& dataset, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute file: " + path.string());

  std::unordered_map<std::string, std::set<std::string>> features_by_item;
  std::string line;
  std::size_t line_no = 0;
  std::size_t known_items = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields[0].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 'item\\tfeature[\\tfeature...]'");
    }
    const std::string item(fields[0]);
    if (!dataset.item_index(item)) continue;  // unknown items are ignored
    auto& set = features_by_item[item];
    if (set.empty()) ++known_items;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      if (!fields[f].empty()) set.insert(std::string(fields[f]));
    }
  }
  if (known_items == 0) {
    throw DataError("attribute file " + path.string() + " does not cover any dataset item");
  }

  // Keep only interactions on items that have at least one feature.
  std::vector<Interaction> kept;
  kept.reserve(dataset.size());
  for (const auto& row : dataset.interactions()) {
    auto it = features_by_item.find(row.item);
    if (it != features_by_item.end() && !it->second.empty()) kept.push_back(row);
  }
  Dataset out = Dataset::from_interactions(std::move(kept));
  if (out.empty()) throw DataError("no interactions left after attribute filtering");

  // Feature vocabulary in order of first appearance over surviving items.
  std::unordered_map<std::string, std::uint32_t> feature_index;
  out.item_features_.resize(out.num_items());
  for (std::uint32_t item = 0; item < out.num_items(); ++item) {
    const auto& set = features_by_item.at(out.item_ids()[item]);
    for (const auto& name : set) {
      auto it = feature_index.find(name);
      if (it == feature_index.end()) {
        it = feature_index.emplace(name, static_cast<std::uint32_t>(out.feature_ids_.size())).first;
        out.feature_ids_.push_back(name);
      }
      out.item_features_[item].push_back(it->second);
    }
    std::sort(out.item_features_[item].begin(), out.item_features_[item].end());
  }

  const std::size_t dropped = dataset.num_items() - known_items;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "side information: %zu features, %zu items dropped (no features), "
                "%zu interactions remain",
                out.feature_ids_.size(), dropped, out.size());
  log_line(Stage::Load, buf);
  return out;
}

std::unordered_map<std::string, std::string> load_cluster_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cluster file: " + path.string());
  std::unordered_map<std::string, std::string> map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 'entity\\tcluster'");
    }
    map[std::string(fields[0])] = std::string(fields[1]);
  }
  if (map.empty()) throw DataError("empty cluster file: " + path.string());
  return map;
}

void write_events_tsv(const std::filesystem::path& path, const Dataset& base,
                      const std::vector<Event>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& ev : events) {
    out << base.user_ids()[ev.user] << '\t' << base.item_ids()[ev.item] << '\t';
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), ev.rating);
    out.write(buf, res.ptr - buf);
    if (ev.has_timestamp) out << '\t' << ev.timestamp;
    out << '\n';
  }
}

}  // namespace recpipe
