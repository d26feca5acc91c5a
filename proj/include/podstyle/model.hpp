#pragma once

// Bag-of-ngrams TF-IDF, L2-regularized logistic regression, stratified
// cross-validation, ablations, the K% sweep, and top-weighted ngrams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/engagement.hpp"
#include "podstyle/table.hpp"

namespace podstyle {

// ---------------------------------------------------------------------------
// Ngrams and TF-IDF

using WordDoc = std::vector<std::string>;

inline constexpr std::string_view kBigramJoiner = "_";

// Unigrams followed by bigrams ("w1_w2"), in document order.
inline std::vector<std::string> doc_ngrams(const WordDoc& words) {
  std::vector<std::string> out(words.begin(), words.end());
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    out.push_back(words[i] + std::string(kBigramJoiner) + words[i + 1]);
  }
  return out;
}

struct NgramVocab {
  std::vector<std::string> terms;  // sorted
  std::vector<std::size_t> df;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t num_docs = 0;
  std::size_t min_df = 2;

  std::size_t size() const { return terms.size(); }

  std::optional<std::size_t> find(const std::string& term) const {
    const auto it = index.find(term);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

inline NgramVocab build_ngram_vocab(const std::vector<WordDoc>& docs, std::size_t min_df = 2) {
  if (min_df < 1) throw ConfigError("build_ngram_vocab: min_df must be >= 1");
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    auto grams = doc_ngrams(d);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  NgramVocab v;
  v.num_docs = docs.size();
  v.min_df = min_df;
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    v.index.emplace(term, v.terms.size());
    v.terms.push_back(term);
    v.df.push_back(count);
  }
  if (v.terms.empty()) {
    throw DataError("build_ngram_vocab: no ngram reaches min_df=" + std::to_string(min_df));
  }
  return v;
}

inline double ngram_idf(const NgramVocab& v, std::size_t j) {
  return std::log((1.0 + static_cast<double>(v.num_docs)) / (1.0 + static_cast<double>(v.df[j]))) + 1.0;
}

// Compressed sparse rows.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  // Appends a row from (column, value) pairs; columns must be strictly increasing.
  void push_row(const std::vector<std::pair<std::size_t, double>>& entries) {
    std::size_t prev = 0;
    bool first = true;
    for (const auto& [c, v] : entries) {
      if (c >= cols) throw InvariantError("SparseMatrix: column out of range");
      if (!first && c <= prev) throw InvariantError("SparseMatrix: columns not strictly increasing");
      if (!std::isfinite(v)) throw InvariantError("SparseMatrix: non-finite value");
      col_idx.push_back(c);
      values.push_back(v);
      prev = c;
      first = false;
    }
    row_ptr.push_back(col_idx.size());
    ++rows;
  }

  std::size_t row_nnz(std::size_t r) const { return row_ptr[r + 1] - row_ptr[r]; }

  SparseMatrix select_rows(const std::vector<std::size_t>& which) const {
    SparseMatrix m;
    m.cols = cols;
    for (std::size_t r : which) {
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        m.col_idx.push_back(col_idx[k]);
        m.values.push_back(values[k]);
      }
      m.row_ptr.push_back(m.col_idx.size());
      ++m.rows;
    }
    return m;
  }

  std::vector<double> to_dense_row(std::size_t r) const {
    std::vector<double> out(cols, 0.0);
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[col_idx[k]] = values[k];
    return out;
  }
};

struct TfidfMatrix {
  SparseMatrix X;
  std::vector<bool> empty_rows;  // documents with no in-vocabulary ngram
};

// tf = raw count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalized.
inline TfidfMatrix tfidf_transform(const std::vector<WordDoc>& docs, const NgramVocab& vocab) {
  TfidfMatrix out;
  out.X.cols = vocab.size();
  for (const auto& d : docs) {
    std::map<std::size_t, double> tf;
    for (const auto& g : doc_ngrams(d)) {
      if (const auto j = vocab.find(g)) tf[*j] += 1.0;
    }
    std::vector<std::pair<std::size_t, double>> row;
    double norm2 = 0.0;
    for (const auto& [j, c] : tf) {
      const double v = c * ngram_idf(vocab, j);
      row.emplace_back(j, v);
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    for (auto& e : row) e.second /= norm;
    out.empty_rows.push_back(row.empty());
    out.X.push_row(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense matrices

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  DenseMatrix select_rows(const std::vector<std::size_t>& which) const {
    DenseMatrix m(which.size(), cols);
    for (std::size_t i = 0; i < which.size(); ++i) {
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(which[i] * cols), cols,
                  m.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    }
    return m;
  }

  DenseMatrix select_cols(const std::vector<std::size_t>& which) const {
    DenseMatrix m(rows, which.size());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < which.size(); ++j) m.at(r, j) = at(r, which[j]);
    }
    return m;
  }
};

inline DenseMatrix to_dense(const FeatureTable& t) {
  DenseMatrix m(t.num_rows(), t.num_cols());
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    if (t.rows[r].size() != t.num_cols()) throw DataError("feature table row has the wrong width");
    std::copy(t.rows[r].begin(), t.rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

inline void multiply(const DenseMatrix& X, const std::vector<double>& w, double b, std::vector<double>& z) {
  z.assign(X.rows, b);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const double* row = X.data.data() + r * X.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < X.cols; ++c) s += row[c] * w[c];
    z[r] += s;
  }
}

inline void multiply(const SparseMatrix& X, const std::vector<double>& w, double b, std::vector<double>& z) {
  z.assign(X.rows, b);
  for (std::size_t r = 0; r < X.rows; ++r) {
    double s = 0.0;
    for (std::size_t k = X.row_ptr[r]; k < X.row_ptr[r + 1]; ++k) s += X.values[k] * w[X.col_idx[k]];
    z[r] += s;
  }
}

// g = X^T d
inline void transpose_multiply(const DenseMatrix& X, const std::vector<double>& d, std::vector<double>& g) {
  g.assign(X.cols, 0.0);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const double* row = X.data.data() + r * X.cols;
    for (std::size_t c = 0; c < X.cols; ++c) g[c] += row[c] * d[r];
  }
}

inline void transpose_multiply(const SparseMatrix& X, const std::vector<double>& d, std::vector<double>& g) {
  g.assign(X.cols, 0.0);
  for (std::size_t r = 0; r < X.rows; ++r) {
    for (std::size_t k = X.row_ptr[r]; k < X.row_ptr[r + 1]; ++k) g[X.col_idx[k]] += X.values[k] * d[r];
  }
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogRegParams {
  double lambda = 1.0;
  int max_iter = 1000;
  double tol = 1e-6;
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;  // 1 for constant columns

  bool empty() const { return mean.empty(); }

  static Standardizer fit(const DenseMatrix& X) {
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.sd.assign(X.cols, 0.0);
    const double n = static_cast<double>(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) {
      for (std::size_t c = 0; c < X.cols; ++c) s.mean[c] += X.at(r, c);
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < X.rows; ++r) {
      for (std::size_t c = 0; c < X.cols; ++c) {
        const double d = X.at(r, c) - s.mean[c];
        s.sd[c] += d * d;
      }
    }
    for (auto& v : s.sd) {
      v = std::sqrt(v / n);
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  DenseMatrix apply(const DenseMatrix& X) const {
    if (X.cols != mean.size()) throw InvariantError("standardizer: column count mismatch");
    DenseMatrix out = X;
    for (std::size_t r = 0; r < X.rows; ++r) {
      for (std::size_t c = 0; c < X.cols; ++c) out.at(r, c) = (X.at(r, c) - mean[c]) / sd[c];
    }
    return out;
  }
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 1.0;
  Standardizer standardizer;  // empty for sparse inputs
  std::vector<double> loss_trace;
  int iterations = 0;
  bool converged = false;
};

namespace logreg_detail {

// log(1 + e^z)
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void check_labels(const std::vector<int>& y, std::size_t rows) {
  if (y.size() != rows) throw DataError("train_logreg: label count does not match rows");
  bool zero = false, one = false;
  for (int v : y) {
    if (v == 0) zero = true;
    else if (v == 1) one = true;
    else throw DataError("train_logreg: labels must be 0 or 1");
  }
  if (!zero || !one) throw DataError("train_logreg: both classes must be present");
}

}  // namespace logreg_detail

// mean_i [log(1 + e^{z_i}) - y_i z_i] + lambda/2 ||w||^2, z = Xw + b.
template <typename Matrix>
double logreg_objective(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w, double b,
                        double lambda) {
  std::vector<double> z;
  multiply(X, w, b, z);
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) loss += logreg_detail::softplus(z[i]) - y[i] * z[i];
  loss /= static_cast<double>(z.size());
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + 0.5 * lambda * reg;
}

// Returns the gradient with respect to w; the bias component goes to `grad_b`.
template <typename Matrix>
std::vector<double> logreg_gradient(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w,
                                    double b, double lambda, double& grad_b) {
  std::vector<double> z;
  multiply(X, w, b, z);
  const double n = static_cast<double>(z.size());
  std::vector<double> d(z.size());
  grad_b = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    d[i] = (logreg_detail::sigmoid(z[i]) - y[i]) / n;
    grad_b += d[i];
  }
  std::vector<double> g;
  transpose_multiply(X, d, g);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] += lambda * w[j];
  return g;
}

namespace logreg_detail {

template <typename Matrix>
void fit(const Matrix& X, const std::vector<int>& y, const LogRegParams& p, LogRegModel& m) {
  m.weights.assign(X.cols, 0.0);
  m.bias = 0.0;
  m.lambda = p.lambda;
  double f = logreg_objective(X, y, m.weights, m.bias, p.lambda);
  m.loss_trace.assign(1, f);
  double step = 1.0;
  std::vector<double> trial_w(X.cols);
  for (m.iterations = 0; m.iterations < p.max_iter; ++m.iterations) {
    double gb = 0.0;
    const auto g = logreg_gradient(X, y, m.weights, m.bias, p.lambda, gb);
    double gnorm2 = gb * gb;
    for (double v : g) gnorm2 += v * v;
    if (std::sqrt(gnorm2) < p.tol) {
      m.converged = true;
      break;
    }
    // Armijo backtracking, starting from twice the last accepted step.
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t j = 0; j < X.cols; ++j) trial_w[j] = m.weights[j] - step * g[j];
      const double trial_b = m.bias - step * gb;
      const double trial_f = logreg_objective(X, y, trial_w, trial_b, p.lambda);
      if (trial_f <= f - 1e-4 * step * gnorm2) {
        m.weights.swap(trial_w);
        trial_w.resize(X.cols);
        m.bias = trial_b;
        f = trial_f;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      m.converged = true;  // no representable descent step left
      break;
    }
    m.loss_trace.push_back(f);
  }
  for (double v : m.weights) {
    if (!std::isfinite(v)) throw InvariantError("train_logreg: non-finite weight");
  }
}

}  // namespace logreg_detail

// Dense features are z-scored with statistics of X (the training rows) only.
inline LogRegModel train_logreg(const DenseMatrix& X, const std::vector<int>& y, const LogRegParams& p = {}) {
  logreg_detail::check_labels(y, X.rows);
  LogRegModel m;
  m.standardizer = Standardizer::fit(X);
  logreg_detail::fit(m.standardizer.apply(X), y, p, m);
  return m;
}

inline LogRegModel train_logreg(const SparseMatrix& X, const std::vector<int>& y, const LogRegParams& p = {}) {
  logreg_detail::check_labels(y, X.rows);
  LogRegModel m;
  logreg_detail::fit(X, y, p, m);
  return m;
}

inline std::vector<double> predict_proba(const LogRegModel& m, const DenseMatrix& X) {
  std::vector<double> z;
  if (m.standardizer.empty()) multiply(X, m.weights, m.bias, z);
  else multiply(m.standardizer.apply(X), m.weights, m.bias, z);
  for (auto& v : z) v = logreg_detail::sigmoid(v);
  return z;
}

inline std::vector<double> predict_proba(const LogRegModel& m, const SparseMatrix& X) {
  if (!m.standardizer.empty()) throw ConfigError("predict_proba: model was trained on dense features");
  std::vector<double> z;
  multiply(X, m.weights, m.bias, z);
  for (auto& v : z) v = logreg_detail::sigmoid(v);
  return z;
}

template <typename Matrix>
double accuracy(const LogRegModel& m, const Matrix& X, const std::vector<int>& y) {
  const auto p = predict_proba(m, X);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if ((p[i] >= 0.5 ? 1 : 0) == y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

// Text format:
//   podstyle-logreg 1
//   lambda <value>
//   bias <value>
//   standardization <d>      followed by d lines "name TAB mean TAB sd" (d = 0 for sparse)
//   weights <d>              followed by d lines "name TAB weight"
inline void write_logreg_model(const LogRegModel& m, const std::vector<std::string>& names, std::ostream& out) {
  if (names.size() != m.weights.size()) throw InvariantError("write_logreg_model: name count mismatch");
  out << "podstyle-logreg 1\n";
  out << "lambda " << format_double(m.lambda) << '\n';
  out << "bias " << format_double(m.bias) << '\n';
  out << "standardization " << m.standardizer.mean.size() << '\n';
  for (std::size_t j = 0; j < m.standardizer.mean.size(); ++j) {
    out << names[j] << '\t' << format_double(m.standardizer.mean[j]) << '\t' << format_double(m.standardizer.sd[j])
        << '\n';
  }
  out << "weights " << m.weights.size() << '\n';
  for (std::size_t j = 0; j < m.weights.size(); ++j) out << names[j] << '\t' << format_double(m.weights[j]) << '\n';
}

inline LogRegModel read_logreg_model(std::istream& in, std::vector<std::string>* names = nullptr) {
  std::string line;
  auto next = [&](std::string_view what) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() != '#') return;
    }
    throw DataError("logreg model: missing " + std::string(what));
  };
  auto keyed = [&](std::string_view key) {
    next(key);
    const auto parts = split(line, ' ');
    if (parts.size() != 2 || parts[0] != key) throw DataError("logreg model: expected '" + std::string(key) + "'");
    return parts[1];
  };
  next("header");
  if (trim(line) != "podstyle-logreg 1") throw DataError("logreg model: bad header");
  LogRegModel m;
  m.lambda = parse_double(keyed("lambda"));
  m.bias = parse_double(keyed("bias"));
  const auto ds = static_cast<std::size_t>(parse_int(keyed("standardization")));
  for (std::size_t j = 0; j < ds; ++j) {
    next("standardization row");
    const auto cells = split(line, '\t');
    if (cells.size() != 3) throw DataError("logreg model: bad standardization row");
    m.standardizer.mean.push_back(parse_double(cells[1]));
    m.standardizer.sd.push_back(parse_double(cells[2]));
  }
  const auto dw = static_cast<std::size_t>(parse_int(keyed("weights")));
  if (ds != 0 && ds != dw) throw DataError("logreg model: standardization and weight blocks differ in size");
  if (names) names->clear();
  for (std::size_t j = 0; j < dw; ++j) {
    next("weight row");
    const auto cells = split(line, '\t');
    if (cells.size() != 2) throw DataError("logreg model: bad weight row");
    if (names) names->push_back(cells[0]);
    m.weights.push_back(parse_double(cells[1]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation

using Folds = std::vector<std::vector<std::size_t>>;

// Each class is shuffled and dealt round-robin; dealing continues across
// classes so fold sizes also differ by at most one.
inline Folds stratified_folds(const std::vector<int>& y, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_folds: k must be >= 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      throw DataError("stratified_folds: class " + std::to_string(label) + " has " +
                      std::to_string(members.size()) + " samples, fewer than k=" + std::to_string(k));
    }
  }
  Folds folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, "fold", std::to_string(label)));
    rng.shuffle(members);
    for (std::size_t i : members) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct CvResult {
  std::string feature_set;
  std::vector<double> fold_accuracy;
  std::vector<double> train_accuracy;
  double mean_accuracy = 0.0;
  std::uint64_t fold_seed = 0;
};

inline std::vector<int> select_labels(const std::vector<int>& y, const std::vector<std::size_t>& which) {
  std::vector<int> out;
  out.reserve(which.size());
  for (auto i : which) out.push_back(y[i]);
  return out;
}

template <typename Matrix>
CvResult cross_validate(const Matrix& X, const std::vector<int>& y, const Folds& folds, const LogRegParams& p,
                        std::string feature_set = "", std::uint64_t fold_seed = 0) {
  if (y.size() != X.rows) throw DataError("cross_validate: label count does not match rows");
  std::vector<int> seen(X.rows, 0);
  for (const auto& f : folds) {
    for (auto i : f) {
      if (i >= X.rows || seen[i]++) throw ConfigError("cross_validate: folds are not a partition");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ConfigError("cross_validate: folds do not cover every row");
  }
  CvResult r;
  r.feature_set = std::move(feature_set);
  r.fold_seed = fold_seed;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    const auto Xtr = X.select_rows(train);
    const auto ytr = select_labels(y, train);
    const auto model = train_logreg(Xtr, ytr, p);
    r.train_accuracy.push_back(accuracy(model, Xtr, ytr));
    r.fold_accuracy.push_back(accuracy(model, X.select_rows(folds[f]), select_labels(y, folds[f])));
  }
  r.mean_accuracy = std::accumulate(r.fold_accuracy.begin(), r.fold_accuracy.end(), 0.0) /
                    static_cast<double>(r.fold_accuracy.size());
  return r;
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  std::string group;
  double baseline = 0.0;
  double accuracy = 0.0;
  double delta_points = 0.0;  // (baseline - accuracy) * 100
  bool flagged = false;       // |delta| > 1 point
};

inline constexpr double kAblationFlagPoints = 1.0;

inline std::vector<std::size_t> columns_without(const FeatureTable& t, const std::set<std::string>& removed) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < t.num_cols(); ++c) {
    if (!removed.count(t.groups[c])) keep.push_back(c);
  }
  return keep;
}

// CV accuracy with the named column groups removed.
inline CvResult cross_validate_without(const FeatureTable& t, const std::vector<int>& y, const Folds& folds,
                                       const LogRegParams& p, const std::set<std::string>& removed) {
  const std::set<std::string> known(t.groups.begin(), t.groups.end());
  for (const auto& g : removed) {
    if (!known.count(g)) throw ConfigError("ablation: unknown feature group '" + g + "'");
  }
  const auto keep = columns_without(t, removed);
  if (keep.empty()) throw ConfigError("ablation: removing these groups leaves no columns");
  return cross_validate(to_dense(t).select_cols(keep), y, folds, p);
}

// One row per group (in first-appearance order unless `groups` is given).
inline std::vector<AblationRow> ablation(const FeatureTable& t, const std::vector<int>& y, const Folds& folds,
                                         const LogRegParams& p, std::vector<std::string> groups = {}) {
  if (groups.empty()) {
    for (const auto& g : t.groups) {
      if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    }
  }
  const double baseline = cross_validate(to_dense(t), y, folds, p).mean_accuracy;
  std::vector<AblationRow> out;
  for (const auto& g : groups) {
    AblationRow row;
    row.group = g;
    row.baseline = baseline;
    row.accuracy = cross_validate_without(t, y, folds, p, {g}).mean_accuracy;
    row.delta_points = (baseline - row.accuracy) * 100.0;
    row.flagged = std::abs(row.delta_points) > kAblationFlagPoints;
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeled sets, representations, and the K% sweep

struct LabeledSet {
  std::vector<std::string> episode_ids;  // sorted
  std::vector<int> labels;               // 1 = high engagement
};

inline LabeledSet labeled_set(const std::vector<EngagementRecord>& records) {
  std::vector<std::pair<std::string, int>> rows;
  for (const auto& r : records) {
    if (r.group) rows.emplace_back(r.episode_id, *r.group == EngagementGroup::high ? 1 : 0);
  }
  std::sort(rows.begin(), rows.end());
  LabeledSet s;
  for (auto& [id, y] : rows) {
    s.episode_ids.push_back(std::move(id));
    s.labels.push_back(y);
  }
  return s;
}

// A named feature representation that can be cross-validated on any
// labeled subset of episodes.
struct Representation {
  std::string name;
  std::function<CvResult(const LabeledSet&, const Folds&, const LogRegParams&)> evaluate;
};

inline Representation dense_representation(std::string name, FeatureTable table) {
  auto shared = std::make_shared<const FeatureTable>(std::move(table));
  return {name, [shared, name](const LabeledSet& s, const Folds& folds, const LogRegParams& p) {
            const auto idx = shared->row_index();
            std::vector<std::size_t> rows;
            for (const auto& id : s.episode_ids) {
              const auto it = idx.find(id);
              if (it == idx.end()) throw DataError(name + ": no features for episode '" + id + "'");
              rows.push_back(it->second);
            }
            return cross_validate(to_dense(shared->select_rows(rows)), s.labels, folds, p, name);
          }};
}

// Vocabulary and idf are fit on all documents of the labeled set (labels unused).
inline Representation ngram_representation(std::string name, std::unordered_map<std::string, WordDoc> docs,
                                           std::size_t min_df) {
  auto shared = std::make_shared<const std::unordered_map<std::string, WordDoc>>(std::move(docs));
  return {name, [shared, name, min_df](const LabeledSet& s, const Folds& folds, const LogRegParams& p) {
            std::vector<WordDoc> subset;
            for (const auto& id : s.episode_ids) {
              const auto it = shared->find(id);
              if (it == shared->end()) throw DataError(name + ": no document for episode '" + id + "'");
              subset.push_back(it->second);
            }
            const auto vocab = build_ngram_vocab(subset, min_df);
            return cross_validate(tfidf_transform(subset, vocab).X, s.labels, folds, p, name);
          }};
}

struct SweepRow {
  double k_percent = 0.0;
  std::string representation;
  std::size_t num_episodes = 0;
  double mean_accuracy = 0.0;
};

struct SweepConfig {
  std::vector<double> k_percents{10, 15, 20, 25, 50};
  int folds = 5;
  std::uint64_t seed = 1;
  bool per_quartile = true;
  LogRegParams logreg;
};

inline std::uint64_t fold_seed_for(std::uint64_t seed, double k_percent) {
  return derive_seed(seed, "folds", format_double(k_percent));
}

// Groups are rebuilt at each K; all representations share that K's folds.
inline std::vector<SweepRow> sweep_K(const std::vector<EngagementRecord>& records,
                                     const std::vector<Representation>& reps, const SweepConfig& cfg) {
  std::vector<SweepRow> out;
  for (double k : cfg.k_percents) {
    const auto grouped = build_groups(records, GroupSpec{k, cfg.per_quartile});
    const auto s = labeled_set(grouped);
    const auto seed = fold_seed_for(cfg.seed, k);
    const auto folds = stratified_folds(s.labels, cfg.folds, seed);
    for (const auto& rep : reps) {
      const auto cv = rep.evaluate(s, folds, cfg.logreg);
      out.push_back({k, rep.name, s.episode_ids.size(), cv.mean_accuracy});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Top-weighted ngrams

struct WeightedTerm {
  std::string term;
  double weight = 0.0;
};

struct TopNgrams {
  std::vector<WeightedTerm> high;  // largest weights first
  std::vector<WeightedTerm> low;   // smallest weights first
};

inline TopNgrams top_weighted_ngrams(const LogRegModel& m, const NgramVocab& vocab, std::size_t n = 200) {
  if (m.weights.size() != vocab.size()) throw ConfigError("top_weighted_ngrams: model and vocabulary differ");
  n = std::min(n, vocab.size());
  std::vector<std::size_t> order(vocab.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto take = [&](auto better) {
    auto o = order;
    std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
      if (m.weights[a] != m.weights[b]) return better(m.weights[a], m.weights[b]);
      return vocab.terms[a] < vocab.terms[b];
    });
    std::vector<WeightedTerm> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({vocab.terms[o[i]], m.weights[o[i]]});
    return out;
  };
  return {take(std::greater<double>{}), take(std::less<double>{})};
}

// ---------------------------------------------------------------------------
// Tables

inline std::string percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", accuracy * 100.0);
  return buf;
}

inline void write_cv_csv(const std::vector<CvResult>& rows, std::ostream& out) {
  std::size_t k = 0;
  for (const auto& r : rows) k = std::max(k, r.fold_accuracy.size());
  out << "feature_set,mean_accuracy";
  for (std::size_t f = 0; f < k; ++f) out << ",fold" << f + 1;
  out << ",fold_seed\n";
  for (const auto& r : rows) {
    out << csv_field(r.feature_set) << ',' << format_double(r.mean_accuracy);
    for (std::size_t f = 0; f < k; ++f) {
      out << ',';
      if (f < r.fold_accuracy.size()) out << format_double(r.fold_accuracy[f]);
    }
    out << ',' << r.fold_seed << '\n';
  }
}

inline void write_cv_markdown(const std::vector<CvResult>& rows, std::ostream& out) {
  out << "| Features | Accuracy (%) |\n|---|---|\n";
  out << "| Chance | 50.00 |\n";
  for (const auto& r : rows) out << "| " << r.feature_set << " | " << percent(r.mean_accuracy) << " |\n";
}

inline void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "group,baseline,accuracy,delta_points,flagged\n";
  for (const auto& r : rows) {
    out << csv_field(r.group) << ',' << format_double(r.baseline) << ',' << format_double(r.accuracy) << ','
        << format_double(r.delta_points) << ',' << (r.flagged ? "true" : "false") << '\n';
  }
}

inline void write_ablation_markdown(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "| Removed group | Accuracy (%) | Delta (points) | > 1 point |\n|---|---|---|---|\n";
  if (!rows.empty()) out << "| (none) | " << percent(rows.front().baseline) << " | | |\n";
  for (const auto& r : rows) {
    char d[32];
    std::snprintf(d, sizeof d, "%+.2f", r.delta_points);
    out << "| " << r.group << " | " << percent(r.accuracy) << " | " << d << " | " << (r.flagged ? "*" : "")
        << " |\n";
  }
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "k_percent,representation,num_episodes,mean_accuracy\n";
  for (const auto& r : rows) {
    out << format_double(r.k_percent) << ',' << csv_field(r.representation) << ',' << r.num_episodes << ','
        << format_double(r.mean_accuracy) << '\n';
  }
}

// Representations as rows, K values as columns.
inline void write_sweep_markdown(const std::vector<SweepRow>& rows, std::ostream& out) {
  std::vector<double> ks;
  std::vector<std::string> reps;
  for (const auto& r : rows) {
    if (std::find(ks.begin(), ks.end(), r.k_percent) == ks.end()) ks.push_back(r.k_percent);
    if (std::find(reps.begin(), reps.end(), r.representation) == reps.end()) reps.push_back(r.representation);
  }
  out << "| Features";
  for (double k : ks) out << " | K=" << format_double(k) << "%";
  out << " |\n|---";
  for (std::size_t i = 0; i < ks.size(); ++i) out << "|---";
  out << "|\n";
  for (const auto& rep : reps) {
    out << "| " << rep;
    for (double k : ks) {
      out << " | ";
      for (const auto& r : rows) {
        if (r.representation == rep && r.k_percent == k) out << percent(r.mean_accuracy);
      }
    }
    out << " |\n";
  }
}

inline void write_top_ngrams_csv(const TopNgrams& t, std::ostream& out) {
  out << "side,rank,ngram,weight\n";
  for (std::size_t i = 0; i < t.high.size(); ++i) {
    out << "high," << i + 1 << ',' << csv_field(t.high[i].term) << ',' << format_double(t.high[i].weight) << '\n';
  }
  for (std::size_t i = 0; i < t.low.size(); ++i) {
    out << "low," << i + 1 << ',' << csv_field(t.low[i].term) << ',' << format_double(t.low[i].weight) << '\n';
  }
}

}  // namespace podstyle
