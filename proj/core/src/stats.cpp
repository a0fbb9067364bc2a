#include "recpipe/stats.hpp"

#include <algorithm>
#include <cmath>

#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"

namespace recpipe {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  // Lentz's algorithm (modified), following the classical betacf scheme.
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) return 1.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TestOutcome paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StatsError("paired t-test requires aligned samples");
  const std::size_t n = a.size();
  if (n < 2) throw StatsError("paired t-test requires n >= 2");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (const double v : d) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TestOutcome out;
  out.n = n;
  if (sd == 0.0) {
    // zero-variance conventions
    out.statistic = 0.0;
    out.p_value = mean == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p_value = student_t_two_sided_p(out.statistic, static_cast<double>(n - 1));
  return out;
}

TestOutcome wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StatsError("wilcoxon requires aligned samples");
  std::vector<double> d;
  d.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0.0) d.push_back(diff);
  }
  TestOutcome out;
  out.n = d.size();
  if (d.empty()) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const std::size_t n = d.size();

  // mid-ranks over |d|
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(d[x]) < std::fabs(d[y]);
  });
  std::vector<double> rank(n, 0.0);
  bool has_ties = false;
  double tie_correction = 0.0;  // sum of (t^3 - t) over tie groups
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) {
      has_ties = true;
      tie_correction += t * t * t - t;
    }
    i = j + 1;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    (d[k] > 0.0 ? w_plus : w_minus) += rank[k];
  }
  const double w = std::min(w_plus, w_minus);
  out.statistic = w;

  if (n <= 25 && !has_ties) {
    // exact: fraction of the 2^n sign assignments with min rank sum <= w,
    // via the rank-sum distribution (ranks are the integers 1..n here)
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::uint64_t> ways(max_sum + 1, 0);
    ways[0] = 1;
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t s = max_sum; s + 1 > r; --s) {
        ways[s] += ways[s - r];
      }
    }
    const std::size_t w_int = static_cast<std::size_t>(w + 0.5);
    std::uint64_t count = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= w_int || s + w_int >= max_sum) count += ways[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    out.p_value = std::min(1.0, static_cast<double>(count) / total);
    return out;
  }

  // normal approximation with tie and continuity correction
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
  if (variance <= 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const double z = (w - mean + 0.5) / std::sqrt(variance);
  out.p_value = std::min(1.0, std::max(0.0, 2.0 * normal_cdf(z)));
  return out;
}

std::vector<TestResult> pairwise_tests(const PerUserVectors& vectors, const std::string& metric,
                                       int cutoff, const StatsFlags& flags) {
  std::vector<TestResult> results;
  for (std::size_t a = 0; a < vectors.size(); ++a) {
    for (std::size_t b = a + 1; b < vectors.size(); ++b) {
      // pair over the intersection of evaluated users (both sorted by user)
      std::vector<double> va, vb;
      const auto& ua = *vectors[a].second;
      const auto& ub = *vectors[b].second;
      std::size_t i = 0, j = 0;
      while (i < ua.size() && j < ub.size()) {
        if (ua[i].first < ub[j].first) {
          ++i;
        } else if (ub[j].first < ua[i].first) {
          ++j;
        } else {
          va.push_back(ua[i].second);
          vb.push_back(ub[j].second);
          ++i;
          ++j;
        }
      }
      if (va.size() < 2) {
        warn("insufficient paired users for " + vectors[a].first + " vs " + vectors[b].first +
             " on " + metric + "@" + std::to_string(cutoff));
        continue;
      }
      if (flags.wilcoxon) {
        TestResult r;
        r.model_a = vectors[a].first;
        r.model_b = vectors[b].first;
        r.metric = metric;
        r.cutoff = cutoff;
        r.test = "wilcoxon";
        r.outcome = wilcoxon_signed_rank(va, vb);
        results.push_back(std::move(r));
      }
      if (flags.paired_t) {
        TestResult r;
        r.model_a = vectors[a].first;
        r.model_b = vectors[b].first;
        r.metric = metric;
        r.cutoff = cutoff;
        r.test = "paired_t";
        r.outcome = paired_t_test(va, vb);
        results.push_back(std::move(r));
      }
    }
  }
  return results;
}

}  // namespace recpipe
