/*
 * Copyright 2026 The hcs Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "hcs/common.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace hcs {

struct SparseVector {
  std::vector<std::uint32_t> index;  // strictly increasing
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  bool operator==(const SparseVector&) const = default;
};

inline SparseVector sparse_from_dense(std::span<const double> x) {
  SparseVector v;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] != 0.0) {
      v.index.push_back(static_cast<std::uint32_t>(k));
      v.value.push_back(x[k]);
    }
  }
  return v;
}

// Immutable collection of feature vectors with optional binary labels.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::size_t feature_dim, std::vector<SparseVector> rows, std::optional<Labels> labels,
          std::string domain_tag, std::vector<std::string> ids = {})
      : feature_dim_(feature_dim),
        rows_(std::move(rows)),
        labels_(std::move(labels)),
        domain_tag_(std::move(domain_tag)),
        ids_(std::move(ids)) {
    if (feature_dim_ == 0) throw DataError("dataset: feature_dim must be positive");
    for (const auto& r : rows_) {
      if (r.index.size() != r.value.size()) throw DataError("dataset: ragged sparse row");
      for (std::size_t k = 0; k < r.index.size(); ++k) {
        if (r.index[k] >= feature_dim_) throw DataError("dataset: feature index out of range");
        if (k > 0 && r.index[k] <= r.index[k - 1]) {
          throw DataError("dataset: sparse indices must be strictly increasing");
        }
      }
    }
    if (labels_) {
      if (labels_->size() != rows_.size()) throw DataError("dataset: label count mismatch");
      for (int y : *labels_) {
        if (y != 0 && y != 1) throw DataError("dataset: labels must be 0 or 1");
      }
    }
    if (ids_.empty()) {
      ids_.reserve(rows_.size());
      for (std::size_t i = 0; i < rows_.size(); ++i) ids_.push_back(domain_tag_ + ":" + std::to_string(i));
    } else if (ids_.size() != rows_.size()) {
      throw DataError("dataset: id count mismatch");
    }
  }

  static Dataset from_dense(const Points& x, std::optional<Labels> labels, std::string tag) {
    std::vector<SparseVector> rows;
    rows.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) rows.push_back(sparse_from_dense(row_span(x, i)));
    return Dataset(static_cast<std::size_t>(x.cols()), std::move(rows), std::move(labels),
                   std::move(tag));
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t feature_dim() const { return feature_dim_; }
  bool has_labels() const { return labels_.has_value(); }
  const Labels& labels() const {
    if (!labels_) throw DataError("dataset '" + domain_tag_ + "' has no labels");
    return *labels_;
  }
  const std::vector<SparseVector>& rows() const { return rows_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& domain_tag() const { return domain_tag_; }

  double positive_rate() const {
    const auto& y = labels();
    if (y.empty()) return 0.0;
    return static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
  }

  Dataset subset(std::span<const std::size_t> which, std::string tag) const {
    std::vector<SparseVector> rows;
    std::vector<std::string> ids;
    std::optional<Labels> labels;
    if (labels_) labels.emplace();
    for (std::size_t i : which) {
      rows.push_back(rows_.at(i));
      ids.push_back(ids_[i]);
      if (labels) labels->push_back((*labels_)[i]);
    }
    return Dataset(feature_dim_, std::move(rows), std::move(labels), std::move(tag), std::move(ids));
  }

  Dataset without_labels() const {
    return Dataset(feature_dim_, rows_, std::nullopt, domain_tag_, ids_);
  }

  Points dense(std::span<const std::size_t> which) const {
    Points out = Points::Zero(static_cast<Eigen::Index>(which.size()),
                              static_cast<Eigen::Index>(feature_dim_));
    for (std::size_t r = 0; r < which.size(); ++r) {
      const auto& row = rows_.at(which[r]);
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        out(static_cast<Eigen::Index>(r), row.index[k]) = row.value[k];
      }
    }
    return out;
  }

  Points dense() const {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return dense(all);
  }

  Labels labels_at(std::span<const std::size_t> which) const {
    const auto& y = labels();
    Labels out;
    out.reserve(which.size());
    for (std::size_t i : which) out.push_back(y.at(i));
    return out;
  }

 private:
  std::size_t feature_dim_ = 1;
  std::vector<SparseVector> rows_;
  std::optional<Labels> labels_;
  std::string domain_tag_;
  std::vector<std::string> ids_;
};

// ---------------------------------------------------------------------------
// Sampling helpers

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Rejection sampling from N(mu, sigma^2) restricted to [lo, hi].
inline double truncated_normal_sample(std::mt19937_64& rng, double mu, double sigma, double lo,
                                      double hi) {
  require(lo < hi, "truncated_normal_sample: need lo < hi");
  require(sigma > 0.0, "truncated_normal_sample: sigma must be positive");
  const double acceptance = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
  if (!(acceptance >= 1e-6)) {
    throw DataError("truncated_normal_sample: acceptance rate below 1e-6");
  }
  std::normal_distribution<double> dist(mu, sigma);
  for (;;) {
    const double x = dist(rng);
    if (x >= lo && x <= hi) return x;
  }
}

struct ToyParams {
  double p_pos_source = 0.5;
  double p_pos_target = 0.8;
};

// Two-feature binary problem: X1 keeps P(Y | X1) across domains while the
// dependency of Y on X2 is inverted in the target. Target labels are kept for
// evaluation only.
inline std::pair<Dataset, Dataset> gen_toy(std::mt19937_64& rng, std::size_t n_source,
                                           std::size_t n_target, ToyParams params = {}) {
  require(n_source >= 1 && n_target >= 1, "gen_toy: sizes must be >= 1");
  constexpr double kSd = 0.125;
  auto tn = [&rng](double mu) { return truncated_normal_sample(rng, mu, kSd, 0.0, 1.0); };
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Points xs(static_cast<Eigen::Index>(n_source), 2);
  Labels ys(n_source);
  for (std::size_t i = 0; i < n_source; ++i) {
    const int y = uniform01(rng) < params.p_pos_source ? 1 : 0;
    ys[i] = y;
    const auto r = static_cast<Eigen::Index>(i);
    xs(r, 0) = y == 1 ? tn(0.35) : tn(0.65);
    xs(r, 1) = y == 1 ? tn(0.4) : tn(0.6);
  }
  Points xt(static_cast<Eigen::Index>(n_target), 2);
  Labels yt(n_target);
  for (std::size_t i = 0; i < n_target; ++i) {
    const int y = uniform01(rng) < params.p_pos_target ? 1 : 0;
    yt[i] = y;
    const auto r = static_cast<Eigen::Index>(i);
    xt(r, 0) = y == 1 ? uniform(0.0, 0.5) : uniform(0.5, 1.0);
    xt(r, 1) = y == 1 ? tn(0.6) : tn(0.4);
  }
  return {Dataset::from_dense(xs, std::move(ys), "source"),
          Dataset::from_dense(xt, std::move(yt), "target")};
}

// ---------------------------------------------------------------------------
// Shift constructors

namespace detail {

inline std::vector<std::size_t> class_indices(const Dataset& d, int label) {
  std::vector<std::size_t> out;
  const auto& y = d.labels();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == label) out.push_back(i);
  }
  return out;
}

inline std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace detail

struct ShiftSpec {
  enum class Kind { none, concept_drift, target_shift };
  Kind kind = Kind::none;
  double p_pos_given_d1 = 0.8;  // concept drift, source
  double p_pos_given_d2 = 0.2;
  double p_pos_target = 0.9;    // target shift

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    require(prob(p_pos_given_d1) && prob(p_pos_given_d2) && prob(p_pos_target),
            "shift spec: probabilities must lie in [0, 1]");
  }
};

// Source: D1 and D2 in equal parts, with P(Y=1|D1) = p1 and P(Y=1|D2) = p2.
// Target: a disjoint sample, balanced over domain and class.
inline std::pair<Dataset, Dataset> make_concept_drift(std::mt19937_64& rng, const Dataset& d1,
                                                      const Dataset& d2, std::size_t n_source,
                                                      std::size_t n_target,
                                                      double p1 = 0.8, double p2 = 0.2) {
  if (d1.feature_dim() != d2.feature_dim()) {
    throw DataError("make_concept_drift: corpora have different feature dimensions");
  }
  const std::size_t src_d1 = (n_source + 1) / 2;
  const std::size_t src_d2 = n_source - src_d1;
  const std::size_t src_d1_pos = detail::round_count(p1 * static_cast<double>(src_d1));
  const std::size_t src_d2_pos = detail::round_count(p2 * static_cast<double>(src_d2));
  // Target quarters; any remainder goes to the earlier cells.
  std::array<std::size_t, 4> tgt{};
  for (std::size_t k = 0; k < 4; ++k) tgt[k] = n_target / 4 + (k < n_target % 4 ? 1 : 0);

  struct Cell {
    const Dataset* corpus;
    const char* name;
    int label;
    std::size_t in_source;
    std::size_t in_target;
  };
  const std::array<Cell, 4> cells = {{
      {&d1, "D1/positive", 1, src_d1_pos, tgt[0]},
      {&d1, "D1/negative", 0, src_d1 - src_d1_pos, tgt[1]},
      {&d2, "D2/positive", 1, src_d2_pos, tgt[2]},
      {&d2, "D2/negative", 0, src_d2 - src_d2_pos, tgt[3]},
  }};

  std::vector<SparseVector> s_rows, t_rows;
  Labels s_y, t_y;
  std::vector<std::string> s_ids, t_ids;
  for (const auto& cell : cells) {
    auto pool = detail::class_indices(*cell.corpus, cell.label);
    const std::size_t need = cell.in_source + cell.in_target;
    if (pool.size() < need) {
      throw DataError(std::string("make_concept_drift: cell ") + cell.name + " needs " +
                      std::to_string(need) + " samples but has " + std::to_string(pool.size()));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::string prefix = cell.corpus == &d1 ? "d1:" : "d2:";
    for (std::size_t k = 0; k < need; ++k) {
      const std::size_t i = pool[k];
      const bool to_source = k < cell.in_source;
      (to_source ? s_rows : t_rows).push_back(cell.corpus->rows()[i]);
      (to_source ? s_y : t_y).push_back(cell.label);
      (to_source ? s_ids : t_ids).push_back(prefix + cell.corpus->ids()[i]);
    }
  }
  return {Dataset(d1.feature_dim(), std::move(s_rows), std::move(s_y), "source", std::move(s_ids)),
          Dataset(d1.feature_dim(), std::move(t_rows), std::move(t_y), "target", std::move(t_ids))};
}

// Randomly rejects samples of one class so the positive rate approaches p_pos
// as closely as integer counts allow. Kept rows retain their original order.
inline Dataset make_target_shift(std::mt19937_64& rng, const Dataset& d, double p_pos) {
  require(p_pos > 0.0 && p_pos < 1.0, "make_target_shift: p_pos must lie in (0, 1)");
  auto pos = detail::class_indices(d, 1);
  auto neg = detail::class_indices(d, 0);
  if (pos.empty() || neg.empty()) throw DataError("make_target_shift: dataset needs both classes");
  const double rate = static_cast<double>(pos.size()) / static_cast<double>(d.size());
  std::vector<std::size_t>* reject_from = nullptr;
  std::size_t keep = 0;
  if (p_pos >= rate) {
    reject_from = &neg;
    keep = detail::round_count(static_cast<double>(pos.size()) * (1.0 - p_pos) / p_pos);
  } else {
    reject_from = &pos;
    keep = detail::round_count(static_cast<double>(neg.size()) * p_pos / (1.0 - p_pos));
  }
  if (keep == 0 || keep > reject_from->size()) {
    throw DataError("make_target_shift: requested rate is not reachable with available counts");
  }
  std::shuffle(reject_from->begin(), reject_from->end(), rng);
  reject_from->resize(keep);
  std::vector<std::size_t> kept = pos;
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());
  return d.subset(kept, d.domain_tag());
}

// Seeded, label-stratified split into (first, second) with |first| ~ fraction.
inline std::pair<Dataset, Dataset> split(std::mt19937_64& rng, const Dataset& d, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, "split: fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> groups;
  if (d.has_labels()) {
    groups = {detail::class_indices(d, 0), detail::class_indices(d, 1)};
  } else {
    groups.emplace_back(d.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  std::vector<std::size_t> first, second;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    const std::size_t k = detail::round_count(fraction * static_cast<double>(g.size()));
    first.insert(first.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
    second.insert(second.end(), g.begin() + static_cast<std::ptrdiff_t>(k), g.end());
  }
  if (first.empty() || second.empty()) throw DataError("split: degenerate split sizes");
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {d.subset(first, d.domain_tag()), d.subset(second, d.domain_tag())};
}

// ---------------------------------------------------------------------------
// Bag of words

struct Document {
  std::vector<std::pair<std::string, double>> counts;
  std::optional<int> label;
};

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::uint32_t> index;

  std::size_t size() const { return terms.size(); }
};

// Unigram and (optionally) adjacent bigram counts of a pre-tokenized text.
inline Document count_tokens(const std::vector<std::string>& tokens, bool bigrams = true) {
  std::map<std::string, double> c;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    c[tokens[i]] += 1.0;
    if (bigrams && i + 1 < tokens.size()) c[tokens[i] + "_" + tokens[i + 1]] += 1.0;
  }
  Document d;
  d.counts.assign(c.begin(), c.end());
  return d;
}

// The vocab_size most frequent features by total count; ties broken
// lexicographically. Index 0 is the most frequent feature.
inline Vocabulary build_vocabulary(std::span<const Document> corpus, std::size_t vocab_size) {
  require(!corpus.empty(), "build_vocabulary: empty corpus");
  std::unordered_map<std::string, double> freq;
  for (const auto& doc : corpus) {
    for (const auto& [term, count] : doc.counts) freq[term] += count;
  }
  std::vector<std::pair<std::string, double>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);
  if (ranked.empty()) throw DataError("build_vocabulary: empty vocabulary");
  Vocabulary v;
  for (auto& [term, count] : ranked) {
    v.index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
    v.terms.push_back(term);
  }
  return v;
}

// Raw counts over the vocabulary; out-of-vocabulary features are dropped.
inline Dataset vectorize(const Vocabulary& vocab, std::span<const Document> docs, std::string tag) {
  std::vector<SparseVector> rows;
  rows.reserve(docs.size());
  bool all_labeled = !docs.empty();
  for (const auto& doc : docs) {
    std::map<std::uint32_t, double> acc;
    for (const auto& [term, count] : doc.counts) {
      const auto it = vocab.index.find(term);
      if (it != vocab.index.end()) acc[it->second] += count;
    }
    SparseVector v;
    for (const auto& [k, val] : acc) {
      v.index.push_back(k);
      v.value.push_back(val);
    }
    rows.push_back(std::move(v));
    all_labeled = all_labeled && doc.label.has_value();
  }
  std::optional<Labels> labels;
  if (all_labeled) {
    labels.emplace();
    for (const auto& doc : docs) labels->push_back(*doc.label);
  }
  return Dataset(std::max<std::size_t>(vocab.size(), 1), std::move(rows), std::move(labels),
                 std::move(tag));
}

inline std::pair<Vocabulary, Dataset> build_bow(const std::vector<std::vector<std::string>>& corpus,
                                                std::size_t vocab_size = 5000,
                                                bool bigrams = true) {
  require(!corpus.empty(), "build_bow: empty corpus");
  std::vector<Document> docs;
  docs.reserve(corpus.size());
  for (const auto& tokens : corpus) docs.push_back(count_tokens(tokens, bigrams));
  Vocabulary vocab = build_vocabulary(docs, vocab_size);
  Dataset data = vectorize(vocab, docs, "corpus");
  return {std::move(vocab), std::move(data)};
}

// ---------------------------------------------------------------------------
// File formats.
//
// Generic sparse:  optional header "#dim <N>", then one row per line:
//                  "<label>\t<idx>:<val> <idx>:<val> ..." with label 0, 1 or ?
//                  and 0-based strictly increasing indices.
// Processed-ACL:   "<feature>:<count> ... #label#:<positive|negative>".

enum class FileFormat { automatic, sparse, acl };

inline FileFormat parse_file_format(std::string_view s) {
  if (s == "auto") return FileFormat::automatic;
  if (s == "sparse") return FileFormat::sparse;
  if (s == "acl") return FileFormat::acl;
  throw std::invalid_argument("unknown data format: " + std::string(s));
}

namespace detail {

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(where + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DataError("input file not found: " + path);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  return in;
}

}  // namespace detail

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_sparse(std::ostream& os, const Dataset& d) {
  os << "#dim " << d.feature_dim() << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.has_labels()) {
      os << d.labels()[i];
    } else {
      os << '?';
    }
    os << '\t';
    const auto& row = d.rows()[i];
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (k > 0) os << ' ';
      os << row.index[k] << ':' << format_double(row.value[k]);
    }
    os << '\n';
  }
}

inline void write_sparse_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  write_sparse(out, d);
}

inline Dataset read_sparse(std::istream& is, const std::string& tag, const std::string& where) {
  std::vector<SparseVector> rows;
  Labels labels;
  bool any_unlabeled = false;
  std::size_t dim = 0;
  std::size_t max_index_plus_one = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string at = where + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    if (line.starts_with("#dim ")) {
      dim = static_cast<std::size_t>(detail::parse_double(std::string_view(line).substr(5), at));
      continue;
    }
    if (line.front() == '#') continue;
    std::istringstream ls(line);
    std::string label;
    ls >> label;
    if (label == "1" || label == "0") {
      labels.push_back(label == "1" ? 1 : 0);
    } else if (label == "?") {
      any_unlabeled = true;
      labels.push_back(0);
    } else {
      throw DataError(at + ": bad label '" + label + "'");
    }
    SparseVector row;
    std::string item;
    while (ls >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw DataError(at + ": expected idx:val, got '" + item + "'");
      const double idx = detail::parse_double(std::string_view(item).substr(0, colon), at);
      if (idx < 0 || idx != std::floor(idx)) throw DataError(at + ": bad feature index");
      const auto k = static_cast<std::uint32_t>(idx);
      if (!row.index.empty() && k <= row.index.back()) {
        throw DataError(at + ": feature indices must be strictly increasing");
      }
      row.index.push_back(k);
      row.value.push_back(detail::parse_double(std::string_view(item).substr(colon + 1), at));
      max_index_plus_one = std::max<std::size_t>(max_index_plus_one, k + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(where + ": no samples");
  if (dim == 0) dim = std::max<std::size_t>(max_index_plus_one, 1);
  if (max_index_plus_one > dim) throw DataError(where + ": feature index exceeds #dim header");
  std::optional<Labels> opt;
  if (!any_unlabeled) opt = std::move(labels);
  return Dataset(dim, std::move(rows), std::move(opt), tag);
}

inline std::vector<Document> read_acl(std::istream& is, const std::string& where) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string at = where + ":" + std::to_string(lineno);
    std::istringstream ls(line);
    std::string item;
    Document doc;
    bool any = false;
    while (ls >> item) {
      any = true;
      const auto colon = item.rfind(':');
      if (colon == std::string::npos) throw DataError(at + ": expected feature:count");
      const std::string key = item.substr(0, colon);
      const std::string val = item.substr(colon + 1);
      if (key == "#label#") {
        if (val == "positive") {
          doc.label = 1;
        } else if (val == "negative") {
          doc.label = 0;
        } else {
          throw DataError(at + ": bad label '" + val + "'");
        }
      } else {
        doc.counts.emplace_back(key, detail::parse_double(val, at));
      }
    }
    if (any) docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError(where + ": no documents");
  return docs;
}

inline FileFormat detect_format(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with("#dim")) continue;
    return line.find("#label#:") != std::string::npos ? FileFormat::acl : FileFormat::sparse;
  }
  return FileFormat::sparse;
}

inline Dataset read_sparse_file(const std::string& path, const std::string& tag) {
  auto in = detail::open_input(path);
  return read_sparse(in, tag, path);
}

// Loads a (source, target) pair. Processed-ACL corpora share one vocabulary
// built from the union of both files.
inline std::pair<Dataset, Dataset> load_task(const std::string& source_path,
                                             const std::string& target_path,
                                             FileFormat format = FileFormat::automatic,
                                             std::size_t vocab_size = 5000) {
  if (format == FileFormat::automatic) format = detect_format(source_path);
  if (format == FileFormat::sparse) {
    Dataset s = read_sparse_file(source_path, "source");
    Dataset t = read_sparse_file(target_path, "target");
    const std::size_t dim = std::max(s.feature_dim(), t.feature_dim());
    auto widen = [dim](const Dataset& d) {
      return Dataset(dim, d.rows(), d.has_labels() ? std::optional<Labels>(d.labels()) : std::nullopt,
                     d.domain_tag(), d.ids());
    };
    return {widen(s), widen(t)};
  }
  auto in_s = detail::open_input(source_path);
  auto in_t = detail::open_input(target_path);
  auto docs_s = read_acl(in_s, source_path);
  auto docs_t = read_acl(in_t, target_path);
  std::vector<Document> all = docs_s;
  all.insert(all.end(), docs_t.begin(), docs_t.end());
  const Vocabulary vocab = build_vocabulary(all, vocab_size);
  return {vectorize(vocab, docs_s, "source"), vectorize(vocab, docs_t, "target")};
}

}  // namespace hcs
