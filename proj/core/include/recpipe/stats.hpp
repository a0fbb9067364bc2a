#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "recpipe/metrics.hpp"

namespace recpipe {

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // paired sample size (Wilcoxon: after dropping zeros)
};

struct TestResult {
  std::string model_a, model_b;
  std::string metric;
  int cutoff = 0;
  std::string test;  // "paired_t" or "wilcoxon"
  TestOutcome outcome;
};

// Regularized incomplete beta I_x(a, b) by Lentz continued fractions;
// absolute error <= 1e-10 over the tested range.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

double normal_cdf(double z);

// d = a - b; t = mean(d) / (sd(d) / sqrt(n)) with the sample sd. All-zero
// differences give p = 1; zero sd with nonzero mean gives p = 0. Raises
// StatsError for n < 2.
TestOutcome paired_t_test(std::span<const double> a, std::span<const double> b);

// Wilcoxon signed-rank with zero differences dropped and mid-ranks for ties.
// W = min(W+, W-). For n <= 25 without ties the two-sided p is exact:
// the fraction of the 2^n sign assignments whose min rank sum is <= W.
// Otherwise the normal approximation with tie and continuity correction.
TestOutcome wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Per-user vectors for one metric/cutoff, keyed by model name in
// presentation order.
using PerUserVectors =
    std::vector<std::pair<std::string, const std::vector<std::pair<std::uint32_t, double>>*>>;

struct StatsFlags {
  bool wilcoxon = false;
  bool paired_t = false;
};

// Every unordered model pair, every enabled test, paired over the user
// intersection. Pairs with fewer than two common users are skipped.
std::vector<TestResult> pairwise_tests(const PerUserVectors& vectors, const std::string& metric,
                                       int cutoff, const StatsFlags& flags);

}  // namespace recpipe
