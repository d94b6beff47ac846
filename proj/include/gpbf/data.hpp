/*
 * Copyright 2026 The gpbf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GPBF_DATA_HPP
#define GPBF_DATA_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpbf/errors.hpp"

namespace gpbf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/*
 * SubsetMask: a sorted set of 1-based covariate indices in {1..p}.
 * The empty subset is allowed and denotes the pure-noise null model.
 */
class SubsetMask {
 public:
  SubsetMask() = default;

  SubsetMask(std::vector<int> indices, int p) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (int i : indices)
      if (i < 1 || i > p)
        throw InvalidArgument("SubsetMask: index " + std::to_string(i) +
                              " outside [1, " + std::to_string(p) + "]");
    idx_ = std::move(indices);
    p_ = p;
  }

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  int p() const { return p_; }
  const std::vector<int>& indices() const { return idx_; }

  bool contains(int i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
  }

  bool operator==(const SubsetMask& o) const { return idx_ == o.idx_; }
  bool operator!=(const SubsetMask& o) const { return idx_ != o.idx_; }

  // "1+3" for {1,3}; "empty" for the null subset.  Stable across all CSV
  // and JSON outputs.
  std::string label() const {
    if (idx_.empty()) return "empty";
    std::string out;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (i) out += '+';
      out += std::to_string(idx_[i]);
    }
    return out;
  }

  static SubsetMask parse(const std::string& label, int p) {
    if (label == "empty") return SubsetMask({}, p);
    std::vector<int> idx;
    std::stringstream ss(label);
    std::string tok;
    while (std::getline(ss, tok, '+')) {
      try {
        idx.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw InvalidArgument("SubsetMask: cannot parse '" + label + "'");
      }
    }
    return SubsetMask(idx, p);
  }

  // All 2^p subsets in size-then-lexicographic order (the tie-break order
  // used by subset selection).
  static std::vector<SubsetMask> all_subsets(int p) {
    if (p < 1 || p > 20)
      throw InvalidArgument("all_subsets: p must be in [1, 20]");
    std::vector<SubsetMask> out;
    for (unsigned bits = 0; bits < (1u << p); ++bits) {
      std::vector<int> idx;
      for (int j = 0; j < p; ++j)
        if (bits & (1u << j)) idx.push_back(j + 1);
      out.emplace_back(std::move(idx), p);
    }
    std::sort(out.begin(), out.end(), [](const SubsetMask& a, const SubsetMask& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a.indices() < b.indices();
    });
    return out;
  }

 private:
  std::vector<int> idx_;
  int p_ = 0;
};

/*
 * Dataset: response vector plus covariate matrix on a compact covariate
 * space (all |X_ij| <= covariate_bound).
 */
struct Dataset {
  VectorXd y;
  MatrixXd X;
  double covariate_bound = 1.0;

  Dataset() = default;

  Dataset(VectorXd y_in, MatrixXd X_in, double bound)
      : y(std::move(y_in)), X(std::move(X_in)), covariate_bound(bound) {
    validate();
  }

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1 || X.cols() < 1)
      throw InvalidArgument("Dataset: need n >= 1 and p >= 1");
    if (y.size() != X.rows())
      throw DimensionMismatch("Dataset: y length " + std::to_string(y.size()) +
                              " vs X rows " + std::to_string(X.rows()));
    if (!y.allFinite() || !X.allFinite())
      throw InvalidArgument("Dataset: entries must be finite");
    if (!(covariate_bound > 0))
      throw InvalidArgument("Dataset: covariate_bound must be positive");
    if (X.cwiseAbs().maxCoeff() > covariate_bound + 1e-12)
      throw InvalidArgument("Dataset: |X_ij| exceeds covariate_bound " +
                            std::to_string(covariate_bound));
  }

  // Columns selected by a subset, in subset order.
  MatrixXd columns(const SubsetMask& s) const {
    MatrixXd out(X.rows(), s.size());
    for (int j = 0; j < s.size(); ++j) out.col(j) = X.col(s.indices()[j] - 1);
    return out;
  }

  // Leading n-row prefix (nested-data experiments walk prefixes of one
  // long generated sequence).
  Dataset prefix(Eigen::Index n_rows) const {
    if (n_rows < 1 || n_rows > X.rows())
      throw InvalidArgument("Dataset::prefix: bad length " + std::to_string(n_rows));
    return Dataset(y.head(n_rows), X.topRows(n_rows), covariate_bound);
  }
};

// CSV format: header "y,x1,...,xp"; one row per observation.
inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "y";
  for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", d.y(i));
    out << buf;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.X(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

inline Dataset read_dataset_csv(const std::string& path, double covariate_bound) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, "empty file");
  std::vector<std::vector<double>> rows;
  std::size_t ncol = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno),
                         "cannot parse '" + tok + "' as a number");
      }
    }
    if (ncol == 0) ncol = row.size();
    if (row.size() != ncol || ncol < 2)
      throw ParseError(path + ":" + std::to_string(lineno), "inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, "no data rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(ncol - 1);
  VectorXd y(n);
  MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rows[i][0];
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rows[i][j + 1];
  }
  return Dataset(std::move(y), std::move(X), covariate_bound);
}

}  // namespace gpbf

#endif  // GPBF_DATA_HPP
