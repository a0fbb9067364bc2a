#include "recpipe/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct PairStats {
  double dot = 0.0;
  std::size_t co = 0;          // co-indexed entries
  double co_sum_x = 0.0, co_sum_y = 0.0;
  double co_sumsq_x = 0.0, co_sumsq_y = 0.0;
  double co_abs_diff = 0.0;    // sum |x - y| over co entries
  double co_sq_diff = 0.0;     // sum (x - y)^2 over co entries
  double sum_x = 0.0, sum_y = 0.0;
  double abs_x = 0.0, abs_y = 0.0;
  double sumsq_x = 0.0, sumsq_y = 0.0;
  std::size_t nx = 0, ny = 0;
};

PairStats accumulate(SparseVec x, SparseVec y, std::span<const double> offsets) {
  PairStats s;
  s.nx = x.size();
  s.ny = y.size();
  const auto value = [&](const SparseEntry& e) {
    return offsets.empty() ? e.second : e.second - offsets[e.first];
  };
  for (const auto& e : x) {
    const double v = value(e);
    s.sum_x += v;
    s.abs_x += std::fabs(v);
    s.sumsq_x += v * v;
  }
  for (const auto& e : y) {
    const double v = value(e);
    s.sum_y += v;
    s.abs_y += std::fabs(v);
    s.sumsq_y += v * v;
  }
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      const double a = value(x[i]);
      const double b = value(y[j]);
      s.dot += a * b;
      s.co++;
      s.co_sum_x += a;
      s.co_sum_y += b;
      s.co_sumsq_x += a * a;
      s.co_sumsq_y += b * b;
      s.co_abs_diff += std::fabs(a - b);
      s.co_sq_diff += (a - b) * (a - b);
      ++i;
      ++j;
    }
  }
  return s;
}

double kernel_from_stats(SimilarityKind kind, const PairStats& s) {
  switch (kind) {
    case SimilarityKind::Cosine:
    case SimilarityKind::AdjustedCosine: {
      const double nx = std::sqrt(s.sumsq_x);
      const double ny = std::sqrt(s.sumsq_y);
      if (nx == 0.0 || ny == 0.0) return 0.0;
      return s.dot / (nx * ny);
    }
    case SimilarityKind::Jaccard: {
      const std::size_t uni = s.nx + s.ny - s.co;
      if (uni == 0) return 0.0;
      return static_cast<double>(s.co) / static_cast<double>(uni);
    }
    case SimilarityKind::Dice: {
      if (s.nx + s.ny == 0) return 0.0;
      return 2.0 * static_cast<double>(s.co) / static_cast<double>(s.nx + s.ny);
    }
    case SimilarityKind::Pearson: {
      if (s.co < 2) return 0.0;
      const double n = static_cast<double>(s.co);
      const double num = s.dot - s.co_sum_x * s.co_sum_y / n;
      const double var_x = s.co_sumsq_x - s.co_sum_x * s.co_sum_x / n;
      const double var_y = s.co_sumsq_y - s.co_sum_y * s.co_sum_y / n;
      if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
      return num / std::sqrt(var_x * var_y);
    }
    case SimilarityKind::Euclidean: {
      // non-co entries pair with implicit zeros
      const double d2 = s.co_sq_diff + (s.sumsq_x - s.co_sumsq_x) + (s.sumsq_y - s.co_sumsq_y);
      return 1.0 / (1.0 + std::sqrt(std::max(0.0, d2)));
    }
    case SimilarityKind::Manhattan:
    case SimilarityKind::BrayCurtis:
      break;  // handled by the union walk in similarity()
  }
  return 0.0;
}

}  // namespace

std::optional<SimilarityKind> parse_similarity(std::string_view name) {
  const std::string n = lower(name);
  if (n == "cosine") return SimilarityKind::Cosine;
  if (n == "jaccard") return SimilarityKind::Jaccard;
  if (n == "dice") return SimilarityKind::Dice;
  if (n == "pearson") return SimilarityKind::Pearson;
  if (n == "euclidean") return SimilarityKind::Euclidean;
  if (n == "manhattan") return SimilarityKind::Manhattan;
  if (n == "braycurtis") return SimilarityKind::BrayCurtis;
  if (n == "adjusted_cosine") return SimilarityKind::AdjustedCosine;
  return std::nullopt;
}

std::string_view similarity_name(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::Cosine: return "cosine";
    case SimilarityKind::Jaccard: return "jaccard";
    case SimilarityKind::Dice: return "dice";
    case SimilarityKind::Pearson: return "pearson";
    case SimilarityKind::Euclidean: return "euclidean";
    case SimilarityKind::Manhattan: return "manhattan";
    case SimilarityKind::BrayCurtis: return "braycurtis";
    case SimilarityKind::AdjustedCosine: return "adjusted_cosine";
  }
  return "cosine";
}

const std::vector<std::string>& similarity_names() {
  static const std::vector<std::string> names = {"cosine",    "jaccard",   "dice",
                                                 "pearson",   "euclidean", "manhattan",
                                                 "braycurtis", "adjusted_cosine"};
  return names;
}

double similarity(SimilarityKind kind, SparseVec x, SparseVec y,
                  std::span<const double> offsets) {
  if (x.empty() || y.empty()) return 0.0;  // empty profiles never match anything
  if (kind == SimilarityKind::Manhattan || kind == SimilarityKind::BrayCurtis) {
    // walk the union directly; both need sum |x - y| over it
    const auto value = [&](const SparseEntry& e) {
      return offsets.empty() ? e.second : e.second - offsets[e.first];
    };
    double abs_diff = 0.0, sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
      if (j >= y.size() || (i < x.size() && x[i].first < y[j].first)) {
        const double a = value(x[i++]);
        abs_diff += std::fabs(a);
        sum += a;
      } else if (i >= x.size() || y[j].first < x[i].first) {
        const double b = value(y[j++]);
        abs_diff += std::fabs(b);
        sum += b;
      } else {
        const double a = value(x[i++]);
        const double b = value(y[j++]);
        abs_diff += std::fabs(a - b);
        sum += a + b;
      }
    }
    if (kind == SimilarityKind::Manhattan) return 1.0 / (1.0 + abs_diff);
    return sum == 0.0 ? 0.0 : 1.0 - abs_diff / sum;
  }
  const PairStats stats =
      accumulate(x, y, kind == SimilarityKind::AdjustedCosine ? offsets : std::span<const double>{});
  return kernel_from_stats(kind, stats);
}

}  // namespace recpipe
