#pragma once

// Welch's t, bootstrap p-values under the null, Bonferroni flags, Spearman's
// rho, and the per-quartile group-mean report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "podstyle/common.hpp"
#include "podstyle/engagement.hpp"
#include "podstyle/table.hpp"

namespace podstyle {

struct WelchResult {
  double t = 0.0;
  double df = std::numeric_limits<double>::quiet_NaN();
  bool df_defined = false;
};

namespace stats_detail {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

inline Moments moments(std::span<const double> x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

inline WelchResult welch_from_moments(const Moments& a, std::size_t na, const Moments& b, std::size_t nb) {
  WelchResult r;
  const double va = a.var / static_cast<double>(na);
  const double vb = b.var / static_cast<double>(nb);
  const double se2 = va + vb;
  if (se2 <= 0.0) {
    // Both samples constant: equal means give t = 0; otherwise the
    // difference is infinitely many standard errors.
    const double d = a.mean - b.mean;
    r.t = d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
    return r;
  }
  r.t = (a.mean - b.mean) / std::sqrt(se2);
  const double denom = va * va / static_cast<double>(na - 1) + vb * vb / static_cast<double>(nb - 1);
  if (denom > 0.0) {
    r.df = se2 * se2 / denom;
    r.df_defined = true;
  }
  return r;
}

}  // namespace stats_detail

// t = (mean_a - mean_b) / sqrt(s_a^2/n_a + s_b^2/n_b) with Welch-Satterthwaite df.
inline WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("welch_t: each sample needs at least 2 values");
  return stats_detail::welch_from_moments(stats_detail::moments(a), a.size(), stats_detail::moments(b), b.size());
}

// Null distribution of Welch's t from B resamples (with replacement, per
// group) of both samples shifted to the pooled mean.
inline std::vector<double> bootstrap_null_t(std::span<const double> a, std::span<const double> b, int B,
                                            std::uint64_t seed) {
  if (a.size() < 2 || b.size() < 2) throw DataError("bootstrap: each sample needs at least 2 values");
  if (B < 1) throw ConfigError("bootstrap: B must be >= 1");
  const auto ma = stats_detail::moments(a), mb = stats_detail::moments(b);
  const double pooled = (ma.mean * static_cast<double>(a.size()) + mb.mean * static_cast<double>(b.size())) /
                        static_cast<double>(a.size() + b.size());
  std::vector<double> ca(a.begin(), a.end()), cb(b.begin(), b.end());
  for (auto& v : ca) v += pooled - ma.mean;
  for (auto& v : cb) v += pooled - mb.mean;
  Rng rng(seed);
  std::vector<double> ra(ca.size()), rb(cb.size());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    for (auto& v : ra) v = ca[rng.below(ca.size())];
    for (auto& v : rb) v = cb[rng.below(cb.size())];
    out.push_back(stats_detail::welch_from_moments(stats_detail::moments(ra), ra.size(),
                                                   stats_detail::moments(rb), rb.size()).t);
  }
  return out;
}

// Two-sided add-one p-value: (1 + #{|t*| >= |t_obs|}) / (B + 1).
inline double bootstrap_p_from_null(std::span<const double> null_t, double t_obs) {
  const double thr = std::abs(t_obs);
  std::size_t hits = 0;
  for (double t : null_t) {
    if (std::abs(t) >= thr) ++hits;
  }
  return (1.0 + static_cast<double>(hits)) / (static_cast<double>(null_t.size()) + 1.0);
}

inline double bootstrap_welch_p(std::span<const double> a, std::span<const double> b, int B, std::uint64_t seed) {
  const auto obs = welch_t(a, b);
  const auto null_t = bootstrap_null_t(a, b, B, seed);
  return bootstrap_p_from_null(null_t, obs.t);
}

// flag_i = p_i < alpha / m.
inline std::vector<bool> bonferroni_flags(std::span<const double> p, double alpha, int m) {
  if (m < 1) throw ConfigError("bonferroni: m must be >= 1");
  if (static_cast<std::size_t>(m) < p.size()) {
    throw ConfigError("bonferroni: m smaller than the number of tests");
  }
  const double thr = alpha / m;
  std::vector<bool> out;
  out.reserve(p.size());
  for (double v : p) out.push_back(v < thr);
  return out;
}

// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

struct SpearmanResult {
  double rho = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;  // false when either input is constant
};

// Pearson correlation of average ranks; p from t = rho sqrt((n-2)/(1-rho^2))
// against Student's t with n-2 degrees of freedom (two-sided).
inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman: inputs differ in length");
  if (x.size() < 3) throw DataError("spearman: need at least 3 pairs");
  SpearmanResult r;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double rho = pearson(rx, ry);
  if (std::isnan(rho)) return r;
  r.rho = std::clamp(rho, -1.0, 1.0);
  r.defined = true;
  const double n = static_cast<double>(x.size());
  if (std::abs(r.rho) >= 1.0) {
    r.p = 0.0;
  } else if (n <= 2.0) {
    r.p = 1.0;
  } else {
    const double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
    const boost::math::students_t dist(n - 2.0);
    r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Group-mean report

struct StatConfig {
  double alpha = 0.05;
  int m_linguistic = 30;
  int m_lda = 100;
  int bootstrap_b = 10000;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("stats: alpha must be in (0, 1)");
    if (bootstrap_b < 1000) throw ConfigError("stats: bootstrap B must be >= 1000");
    if (m_linguistic < 1 || m_lda < 1) throw ConfigError("stats: family sizes must be >= 1");
  }
};

enum class Direction : unsigned char { up, down };

struct TestResult {
  std::string feature;
  std::string group;
  int quartile = 0;
  double mean_high = 0.0;
  double mean_low = 0.0;
  Direction direction = Direction::down;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
  std::string note;
};

// Column group whose tests use the LDA family size.
inline constexpr std::string_view kLdaGroup = "lda";

// One bootstrap Welch test per (quartile, column), quartile-major, columns
// in table order. LDA-group columns are corrected with m_lda, all others
// with m_linguistic.
inline std::vector<TestResult> group_mean_report(const FeatureTable& table,
                                                 const std::vector<EngagementRecord>& records,
                                                 StatConfig cfg, bool validate_config = true) {
  if (validate_config) cfg.validate();
  const auto idx = table.row_index();
  std::vector<TestResult> out;
  for (int q = 1; q <= 4; ++q) {
    std::vector<std::size_t> high, low;
    for (const auto& r : records) {
      if (r.quartile != q || !r.group) continue;
      const auto it = idx.find(r.episode_id);
      if (it == idx.end()) throw DataError("group_mean_report: no features for episode '" + r.episode_id + "'");
      (*r.group == EngagementGroup::high ? high : low).push_back(it->second);
    }
    std::sort(high.begin(), high.end());
    std::sort(low.begin(), low.end());
    if (high.size() < 2 || low.size() < 2) {
      throw DataError("group_mean_report: quartile " + std::to_string(q) + " needs >= 2 episodes per group");
    }
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      std::vector<double> a, b;
      for (auto i : high) a.push_back(table.rows[i][c]);
      for (auto i : low) b.push_back(table.rows[i][c]);
      TestResult res;
      res.feature = table.columns[c];
      res.group = c < table.groups.size() ? table.groups[c] : "";
      res.quartile = q;
      const auto ma = stats_detail::moments(a), mb = stats_detail::moments(b);
      res.mean_high = ma.mean;
      res.mean_low = mb.mean;
      res.direction = ma.mean > mb.mean ? Direction::up : Direction::down;
      const int m = res.group == kLdaGroup ? cfg.m_lda : cfg.m_linguistic;
      if (ma.var == 0.0 && mb.var == 0.0) {
        res.t_statistic = 0.0;
        res.p_value = 1.0;
        res.significant = false;
        res.note = "zero variance in both groups";
      } else {
        const auto w = welch_t(a, b);
        res.t_statistic = w.t;
        const auto seed = derive_seed(cfg.seed, res.feature, std::to_string(q));
        res.p_value = bootstrap_welch_p(a, b, cfg.bootstrap_b, seed);
        res.significant = res.p_value < cfg.alpha / m;
      }
      out.push_back(std::move(res));
    }
  }
  // Table-section order: feature rows grouped, quartiles side by side.
  std::stable_sort(out.begin(), out.end(), [&](const TestResult& x, const TestResult& y) {
    const auto cx = table.column(x.feature), cy = table.column(y.feature);
    if (cx != cy) return cx < cy;
    return x.quartile < y.quartile;
  });
  return out;
}

inline void write_report_csv(const std::vector<TestResult>& rows, std::ostream& out) {
  out << "feature,quartile,mean_high,mean_low,direction,t,p,significant\n";
  for (const auto& r : rows) {
    out << csv_field(r.feature) << ',' << r.quartile << ',' << format_double(r.mean_high) << ','
        << format_double(r.mean_low) << ',' << (r.direction == Direction::up ? "up" : "down") << ','
        << format_double(r.t_statistic) << ',' << format_double(r.p_value) << ','
        << (r.significant ? "true" : "false") << '\n';
  }
}

// Arrow table: one row per feature, quartiles 1..4 as columns, blank where
// the difference is not significant.
inline void write_report_markdown(const std::vector<TestResult>& rows, std::ostream& out) {
  out << "| Feature | 1 (top) | 2 | 3 | 4 |\n";
  out << "|---|---|---|---|---|\n";
  std::size_t i = 0;
  std::string last_group;
  while (i < rows.size()) {
    const std::string& f = rows[i].feature;
    if (rows[i].group != last_group) {
      out << "| **" << rows[i].group << "** | | | | |\n";
      last_group = rows[i].group;
    }
    std::string cells[4];
    while (i < rows.size() && rows[i].feature == f) {
      const auto& r = rows[i];
      if (r.significant && r.quartile >= 1 && r.quartile <= 4) {
        cells[r.quartile - 1] = r.direction == Direction::up ? "↑" : "↓";
      }
      ++i;
    }
    out << "| " << f;
    for (const auto& c : cells) out << " | " << c;
    out << " |\n";
  }
}

}  // namespace podstyle
