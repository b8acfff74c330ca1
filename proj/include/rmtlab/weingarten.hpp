// Copyright 2026 The rmtlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Weingarten calculus on the real orthogonal group O(m).
//
// Haar moments of matrix entries are sums over pairs of perfect matchings:
//
//   E[g_{i1 j1} ... g_{i2k j2k}] = sum_{a,b} Wg(a, b) delta_i(a) delta_j(b),
//
// where delta_i(a) = 1 iff the row indices agree on every pair of a, and Wg is
// the inverse of the Gram matrix G(a, b) = m^{loops(a, b)}. For m < k the
// Gram matrix is singular and the Moore-Penrose inverse takes its place.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rmtlab/random.hpp"

namespace rmtlab {

inline constexpr int kMaxEnumeratedMatchingSize = 5;
inline constexpr int kMaxWeingartenOrder = 4;
inline constexpr int kMaxExactWeingartenOrder = 3;
inline constexpr int kMaxDetGramDimension = 64;

// Perfect matching of {1..2k}; pairs are stored (smaller, larger) and sorted
// by their smaller element.
struct PairMatching {
  int k = 0;
  std::vector<std::pair<int, int>> pairs;

  // 0-based partner map of size 2k.
  std::vector<int> partners() const;
  // Sorted pair list, e.g. "(1,2)(3,4)".
  std::string to_string() const;

  friend bool operator==(const PairMatching&, const PairMatching&) = default;
};

PairMatching matching_from_partners(const std::vector<int>& partners);

// All (2k-1)!! matchings, ordered lexicographically by the partner of the
// smallest unpaired element. 1 <= k <= 5.
std::vector<PairMatching> enumerate_matchings(int k);

// Number of cycles in the union multigraph of a and b (between 1 and k).
int loops_between(const PairMatching& a, const PairMatching& b);

// Loop sizes (in pairs) minus one, zeros dropped, sorted descending.
struct ReducedCosetType {
  std::vector<int> parts;

  int weight() const noexcept;  // |mu|
  std::string to_string() const;  // "(0)" for the empty partition

  friend bool operator==(const ReducedCosetType&, const ReducedCosetType&) = default;
};

ReducedCosetType reduced_coset_type(const PairMatching& a, const PairMatching& b);

enum class GramInverse { kStrict, kPseudo };

struct WeingartenTable {
  int k = 0;
  int m = 0;
  bool pseudo_inverse = false;
  std::vector<PairMatching> matchings;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd values;
};

// Strict mode throws singular-gram when G is rank deficient (m < k); pseudo
// mode returns the Moore-Penrose inverse in that case. 1 <= k <= 4, m >= 1.
WeingartenTable weingarten_table(int k, int m, GramInverse mode = GramInverse::kStrict);

// CSV dump: matching_a,matching_b,loops,reduced_coset_type,value
void write_table_csv(const WeingartenTable& table, std::ostream& out);

// Exact rational inverse for k <= 3; entries rendered as "p/q".
struct ExactWeingartenTable {
  int k = 0;
  int m = 0;
  std::vector<PairMatching> matchings;
  std::vector<std::vector<std::string>> values;
  std::vector<std::vector<double>> as_double;
};

ExactWeingartenTable weingarten_table_exact(int k, int m);

// Value shared by every matching pair of reduced coset type mu.
double weingarten_value(const ReducedCosetType& mu, int k, int m);

// Large-m expansion. For mu = (0) and mu = (1) with terms = 3 the three-term
// expansions are used; otherwise the leading (-1)^|mu| prod Cat(mu_i) m^{-k-|mu|}.
double wg_asymptotic(const ReducedCosetType& mu, int k, int m, int terms = 3);

// 0 <= j <= 20.
std::uint64_t catalan(int j);

// 1-based row and column indices of the entries in the product.
struct MomentQuery {
  std::vector<int> i_indices;
  std::vector<int> j_indices;
};

// Exact E[prod_t g_{i(t) j(t)}] over Haar O(m). Odd order gives 0; order up to 8.
double orthogonal_moment(const MomentQuery& q, int m);
double orthogonal_moment(const MomentQuery& q, const WeingartenTable& table);

// One representative per equivalence class of non-vanishing moment patterns
// of the given even order (<= 6): row and column indices use the labels
// 1, 2, ... and classes are taken up to a common permutation of positions.
std::vector<MomentQuery> moment_patterns(int order);

struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimates over `trials` Haar samples of O(m).
std::vector<MomentEstimate> orthogonal_moment_mc(const std::vector<MomentQuery>& queries, int m,
                                                 int trials, RandomSeed seed);

// Exact E[Z^p] for Z = det(B^T B), B the first k columns of the top n rows of
// a Haar O(m) matrix. Rows are summed over distinct index tuples by default;
// all_row_tuples = true sums over every tuple instead (same value).
// p = 1 needs k <= 3, p = 2 needs k <= 2; 1 <= k <= n <= m <= 64.
double det_gram_moment_exact(int k, int n, int m, int p, bool all_row_tuples = false);

// One draw of Z for the block of a Haar O(n + l) matrix.
double sample_det_gram(int k, int n, int l, Philox& rng);

struct DetGramMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mu4 = 0.0;
  double se_mean = 0.0;
};

// trials >= 100; trial t uses the stream derive_trial_seed(seed, t).
DetGramMoments det_gram_moment_mc(int k, int n, int l, int trials, RandomSeed seed);

}  // namespace rmtlab
