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

#include "rmtlab/weingarten.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/error.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab {

std::vector<int> PairMatching::partners() const {
  std::vector<int> out(static_cast<std::size_t>(2 * k), -1);
  for (const auto& [a, b] : pairs) {
    out[static_cast<std::size_t>(a - 1)] = b - 1;
    out[static_cast<std::size_t>(b - 1)] = a - 1;
  }
  return out;
}

std::string PairMatching::to_string() const {
  std::string s;
  for (const auto& [a, b] : pairs) s += "(" + std::to_string(a) + "," + std::to_string(b) + ")";
  return s;
}

PairMatching matching_from_partners(const std::vector<int>& partners) {
  require(partners.size() % 2 == 0 && !partners.empty(), "matching needs an even, non-empty ground set");
  PairMatching m;
  m.k = static_cast<int>(partners.size() / 2);
  for (std::size_t p = 0; p < partners.size(); ++p) {
    const int q = partners[p];
    require(q >= 0 && static_cast<std::size_t>(q) < partners.size() && q != static_cast<int>(p) &&
                partners[static_cast<std::size_t>(q)] == static_cast<int>(p),
            "partner map is not a perfect matching");
    if (static_cast<int>(p) < q) m.pairs.emplace_back(static_cast<int>(p) + 1, q + 1);
  }
  return m;
}

namespace {

void enumerate_rec(std::vector<int>& partners, std::vector<PairMatching>& out) {
  const auto first = std::find(partners.begin(), partners.end(), -1);
  if (first == partners.end()) {
    out.push_back(matching_from_partners(partners));
    return;
  }
  const int p = static_cast<int>(first - partners.begin());
  for (std::size_t q = static_cast<std::size_t>(p) + 1; q < partners.size(); ++q) {
    if (partners[q] != -1) continue;
    partners[static_cast<std::size_t>(p)] = static_cast<int>(q);
    partners[q] = p;
    enumerate_rec(partners, out);
    partners[static_cast<std::size_t>(p)] = -1;
    partners[q] = -1;
  }
}

// Loop sizes, counted in pairs of a.
std::vector<int> loop_sizes(const PairMatching& a, const PairMatching& b) {
  require(a.k == b.k, "matchings must have the same size");
  const auto pa = a.partners();
  const auto pb = b.partners();
  std::vector<bool> seen(pa.size(), false);
  std::vector<int> sizes;
  for (std::size_t start = 0; start < pa.size(); ++start) {
    if (seen[start]) continue;
    int length = 0;
    std::size_t p = start;
    do {
      seen[p] = true;
      const auto q = static_cast<std::size_t>(pa[p]);
      seen[q] = true;
      ++length;
      p = static_cast<std::size_t>(pb[q]);
    } while (p != start);
    sizes.push_back(length);
  }
  return sizes;
}

bool compatible(const PairMatching& m, const std::vector<int>& indices) {
  for (const auto& [a, b] : m.pairs)
    if (indices[static_cast<std::size_t>(a - 1)] != indices[static_cast<std::size_t>(b - 1)]) return false;
  return true;
}

Eigen::MatrixXd gram_matrix(const std::vector<PairMatching>& matchings, int m) {
  const auto size = static_cast<Eigen::Index>(matchings.size());
  Eigen::MatrixXd g(size, size);
  for (Eigen::Index a = 0; a < size; ++a)
    for (Eigen::Index b = a; b < size; ++b)
      g(a, b) = g(b, a) = std::pow(static_cast<double>(m),
                                   loops_between(matchings[static_cast<std::size_t>(a)],
                                                 matchings[static_cast<std::size_t>(b)]));
  return g;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<PairMatching> enumerate_matchings(int k) {
  require(k >= 1 && k <= kMaxEnumeratedMatchingSize,
          "enumerate_matchings supports 1 <= k <= " + std::to_string(kMaxEnumeratedMatchingSize));
  std::vector<int> partners(static_cast<std::size_t>(2 * k), -1);
  std::vector<PairMatching> out;
  enumerate_rec(partners, out);
  return out;
}

int loops_between(const PairMatching& a, const PairMatching& b) {
  return static_cast<int>(loop_sizes(a, b).size());
}

int ReducedCosetType::weight() const noexcept { return std::accumulate(parts.begin(), parts.end(), 0); }

std::string ReducedCosetType::to_string() const {
  if (parts.empty()) return "(0)";
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + std::to_string(parts[i]);
  return s + ")";
}

ReducedCosetType reduced_coset_type(const PairMatching& a, const PairMatching& b) {
  ReducedCosetType mu;
  for (int size : loop_sizes(a, b))
    if (size > 1) mu.parts.push_back(size - 1);
  std::sort(mu.parts.begin(), mu.parts.end(), std::greater<>());
  return mu;
}

WeingartenTable weingarten_table(int k, int m, GramInverse mode) {
  require(k >= 1 && k <= kMaxWeingartenOrder,
          "Weingarten tables support 1 <= k <= " + std::to_string(kMaxWeingartenOrder));
  require(m >= 1, "ambient dimension m must be >= 1");
  WeingartenTable table;
  table.k = k;
  table.m = m;
  table.matchings = enumerate_matchings(k);
  table.gram = gram_matrix(table.matchings, m);

  // Nonzero eigenvalues of G are products of integers, hence >= 1; anything
  // below 1/2 is an exact zero blurred by rounding.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(table.gram);
  const auto& lambda = eig.eigenvalues();
  const bool full_rank = lambda.minCoeff() >= 0.5;
  if (!full_rank && mode == GramInverse::kStrict)
    fail(ErrorCode::kSingularGram, "matching Gram matrix is singular for k=" + std::to_string(k) +
                                       ", m=" + std::to_string(m));
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) >= 0.5) inv(i) = 1.0 / lambda(i);
  table.values = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  table.values = 0.5 * (table.values + table.values.transpose()).eval();
  table.pseudo_inverse = !full_rank;

  const auto size = table.gram.rows();
  const double residual = full_rank
      ? (table.values * table.gram - Eigen::MatrixXd::Identity(size, size)).cwiseAbs().maxCoeff()
      : (table.gram * table.values * table.gram - table.gram).cwiseAbs().maxCoeff() / table.gram.cwiseAbs().maxCoeff();
  if (residual > 1e-10) fail(ErrorCode::kInternal, "Gram inversion residual " + format_double(residual));
  return table;
}

void write_table_csv(const WeingartenTable& table, std::ostream& out) {
  out << "matching_a,matching_b,loops,reduced_coset_type,value\n";
  for (std::size_t a = 0; a < table.matchings.size(); ++a) {
    for (std::size_t b = 0; b < table.matchings.size(); ++b) {
      const auto& ma = table.matchings[a];
      const auto& mb = table.matchings[b];
      // Coset types like (2,1) contain commas, so quote that field.
      out << ma.to_string() << ',' << mb.to_string() << ',' << loops_between(ma, mb) << ",\""
          << reduced_coset_type(ma, mb).to_string() << "\","
          << format_double(table.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
    }
  }
}

ExactWeingartenTable weingarten_table_exact(int k, int m) {
  using boost::multiprecision::cpp_rational;
  require(k >= 1 && k <= kMaxExactWeingartenOrder,
          "exact Weingarten tables support 1 <= k <= " + std::to_string(kMaxExactWeingartenOrder));
  require(m >= k, "exact Weingarten tables need an invertible Gram matrix (m >= k)");
  ExactWeingartenTable out;
  out.k = k;
  out.m = m;
  out.matchings = enumerate_matchings(k);
  const std::size_t size = out.matchings.size();

  // Gauss-Jordan on [G | I].
  std::vector<std::vector<cpp_rational>> aug(size, std::vector<cpp_rational>(2 * size));
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      cpp_rational entry = 1;
      for (int t = loops_between(out.matchings[a], out.matchings[b]); t > 0; --t) entry *= m;
      aug[a][b] = entry;
    }
    aug[a][size + a] = 1;
  }
  for (std::size_t col = 0; col < size; ++col) {
    std::size_t pivot = col;
    while (pivot < size && aug[pivot][col] == 0) ++pivot;
    if (pivot == size) fail(ErrorCode::kSingularGram, "matching Gram matrix is singular");
    std::swap(aug[pivot], aug[col]);
    const cpp_rational scale = aug[col][col];
    for (auto& x : aug[col]) x /= scale;
    for (std::size_t r = 0; r < size; ++r) {
      if (r == col || aug[r][col] == 0) continue;
      const cpp_rational factor = aug[r][col];
      for (std::size_t c = col; c < 2 * size; ++c) aug[r][c] -= factor * aug[col][c];
    }
  }
  out.values.assign(size, std::vector<std::string>(size));
  out.as_double.assign(size, std::vector<double>(size));
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      const cpp_rational& v = aug[a][size + b];
      out.values[a][b] = boost::multiprecision::numerator(v).str() + "/" +
                         boost::multiprecision::denominator(v).str();
      out.as_double[a][b] = v.convert_to<double>();
    }
  }
  return out;
}

double weingarten_value(const ReducedCosetType& mu, int k, int m) {
  int used = 0;
  for (int part : mu.parts) {
    require(part >= 1, "reduced coset type parts must be positive (omit zeros)");
    used += part + 1;
  }
  require(used <= k, "coset type " + mu.to_string() + " is not realizable with k=" + std::to_string(k));
  std::vector<PairMatching> matchings;
  std::vector<double> row;
  if (k <= kMaxExactWeingartenOrder && m >= k) {
    auto exact = weingarten_table_exact(k, m);
    matchings = std::move(exact.matchings);
    row = std::move(exact.as_double.front());
  } else {
    const WeingartenTable table = weingarten_table(k, m);
    matchings = table.matchings;
    for (Eigen::Index b = 0; b < table.values.cols(); ++b) row.push_back(table.values(0, b));
  }
  // Every coset type occurs in the row of the first matching.
  std::vector<double> hits;
  double scale = 0.0;
  for (std::size_t b = 0; b < matchings.size(); ++b) {
    scale = std::max(scale, std::abs(row[b]));
    if (reduced_coset_type(matchings.front(), matchings[b]) == mu) hits.push_back(row[b]);
  }
  if (hits.empty()) fail(ErrorCode::kInternal, "coset type missing from Weingarten table");
  for (double h : hits)
    if (std::abs(h - hits.front()) > 1e-10 * scale)
      fail(ErrorCode::kInternal, "Weingarten value is not a function of the coset type");
  return hits.front();
}

std::uint64_t catalan(int j) {
  require(j >= 0 && j <= 20, "catalan supports 0 <= j <= 20");
  std::uint64_t c = 1;
  for (int i = 0; i < j; ++i) c = c * 2 * (2 * static_cast<std::uint64_t>(i) + 1) / (static_cast<std::uint64_t>(i) + 2);
  return c;
}

double wg_asymptotic(const ReducedCosetType& mu, int k, int m, int terms) {
  require(k >= 1 && m >= 1, "wg_asymptotic needs k, m >= 1");
  require(terms == 1 || terms == 3, "wg_asymptotic supports 1 or 3 terms");
  const double mm = m;
  const double kk = k;
  auto power = [&](int e) { return std::pow(mm, -static_cast<double>(e)); };
  if (terms == 3 && mu.parts.empty())
    return power(k) + kk * (kk - 1) * power(k + 2) - kk * (kk - 1) * power(k + 3);
  if (terms == 3 && mu.parts == std::vector<int>{1})
    return -power(k + 1) + power(k + 2) - (kk * kk + 3 * kk - 7) * power(k + 3);
  double lead = mu.weight() % 2 == 0 ? 1.0 : -1.0;
  for (int part : mu.parts) lead *= static_cast<double>(catalan(part));
  return lead * power(k + mu.weight());
}

double orthogonal_moment(const MomentQuery& q, const WeingartenTable& table) {
  require(q.i_indices.size() == q.j_indices.size(), "row and column index lists must have equal length");
  require(q.i_indices.size() == static_cast<std::size_t>(2 * table.k), "query order does not match the table");
  for (std::size_t t = 0; t < q.i_indices.size(); ++t)
    require(q.i_indices[t] >= 1 && q.i_indices[t] <= table.m && q.j_indices[t] >= 1 && q.j_indices[t] <= table.m,
            "moment indices must lie in 1..m");
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (std::size_t a = 0; a < table.matchings.size(); ++a) {
    if (compatible(table.matchings[a], q.i_indices)) rows.push_back(static_cast<Eigen::Index>(a));
    if (compatible(table.matchings[a], q.j_indices)) cols.push_back(static_cast<Eigen::Index>(a));
  }
  double sum = 0.0;
  for (auto a : rows)
    for (auto b : cols) sum += table.values(a, b);
  return sum;
}

double orthogonal_moment(const MomentQuery& q, int m) {
  require(q.i_indices.size() == q.j_indices.size(), "row and column index lists must have equal length");
  require(m >= 1, "ambient dimension m must be >= 1");
  const std::size_t order = q.i_indices.size();
  require(order <= static_cast<std::size_t>(2 * kMaxWeingartenOrder), "moment order is limited to 8");
  if (order % 2 == 1) return 0.0;
  if (order == 0) return 1.0;
  const int k = static_cast<int>(order / 2);
  return orthogonal_moment(q, weingarten_table(k, m, m >= k ? GramInverse::kStrict : GramInverse::kPseudo));
}

namespace {

// Set partitions of {0..length-1} as restricted growth strings.
void rgs_rec(std::vector<int>& s, std::size_t pos, int blocks, std::vector<std::vector<int>>& out) {
  if (pos == s.size()) {
    out.push_back(s);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    s[pos] = b;
    rgs_rec(s, pos + 1, std::max(blocks, b + 1), out);
  }
}

std::vector<std::vector<int>> set_partitions(std::size_t length) {
  std::vector<std::vector<int>> out;
  std::vector<int> s(length, 0);
  if (length == 0) return {s};
  rgs_rec(s, 0, 0, out);
  return out;
}

std::vector<int> relabel_first_occurrence(const std::vector<int>& labels) {
  std::map<int, int> fresh;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int x : labels) {
    auto [it, inserted] = fresh.try_emplace(x, static_cast<int>(fresh.size()));
    out.push_back(it->second);
  }
  return out;
}

bool all_blocks_even(const std::vector<int>& rgs) {
  std::map<int, int> counts;
  for (int x : rgs) ++counts[x];
  return std::all_of(counts.begin(), counts.end(), [](const auto& kv) { return kv.second % 2 == 0; });
}

}  // namespace

std::vector<MomentQuery> moment_patterns(int order) {
  require(order >= 2 && order <= 6 && order % 2 == 0, "moment_patterns supports even orders 2..6");
  const auto length = static_cast<std::size_t>(order);
  std::vector<std::vector<int>> even;
  for (auto& p : set_partitions(length))
    if (all_blocks_even(p)) even.push_back(std::move(p));

  std::vector<int> perm(length);
  std::vector<std::pair<std::vector<int>, std::vector<int>>> classes;
  for (const auto& rows : even) {
    for (const auto& cols : even) {
      std::pair<std::vector<int>, std::vector<int>> best;
      bool have = false;
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<int> r(length), c(length);
        for (std::size_t t = 0; t < length; ++t) {
          r[t] = rows[static_cast<std::size_t>(perm[t])];
          c[t] = cols[static_cast<std::size_t>(perm[t])];
        }
        auto candidate = std::make_pair(relabel_first_occurrence(r), relabel_first_occurrence(c));
        if (!have || candidate < best) {
          best = std::move(candidate);
          have = true;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      classes.push_back(std::move(best));
    }
  }
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<MomentQuery> out;
  for (const auto& [r, c] : classes) {
    MomentQuery q;
    for (std::size_t t = 0; t < length; ++t) {
      q.i_indices.push_back(r[t] + 1);
      q.j_indices.push_back(c[t] + 1);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<MomentEstimate> orthogonal_moment_mc(const std::vector<MomentQuery>& queries, int m, int trials,
                                                 RandomSeed seed) {
  require(trials >= 2, "Monte Carlo needs at least two trials");
  for (const auto& q : queries) {
    require(q.i_indices.size() == q.j_indices.size(), "row and column index lists must have equal length");
    for (std::size_t t = 0; t < q.i_indices.size(); ++t)
      require(q.i_indices[t] >= 1 && q.i_indices[t] <= m && q.j_indices[t] >= 1 && q.j_indices[t] <= m,
              "moment indices must lie in 1..m");
  }
  std::vector<CompensatedSum> sums(queries.size());
  std::vector<CompensatedSum> squares(queries.size());
  for (int t = 0; t < trials; ++t) {
    Philox rng(derive_trial_seed(seed, static_cast<std::uint64_t>(t)));
    const MatrixR g = sample_haar_orthogonal(m, rng);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      double prod = 1.0;
      const auto& q = queries[qi];
      for (std::size_t s = 0; s < q.i_indices.size(); ++s) prod *= g(q.i_indices[s] - 1, q.j_indices[s] - 1);
      sums[qi].add(prod);
      squares[qi].add(prod * prod);
    }
  }
  std::vector<MomentEstimate> out;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const double mean = sums[qi].value() / trials;
    const double var = std::max(0.0, (squares[qi].value() - trials * mean * mean) / (trials - 1));
    out.push_back({mean, std::sqrt(var / trials)});
  }
  return out;
}

namespace {

int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

double falling_factorial(int n, int b) {
  double out = 1.0;
  for (int i = 0; i < b; ++i) out *= n - i;
  return out;
}

}  // namespace

double det_gram_moment_exact(int k, int n, int m, int p, bool all_row_tuples) {
  require(p == 1 || p == 2, "det_gram_moment_exact supports p in {1, 2}");
  require(k >= 1 && (p == 1 ? k <= 3 : k <= 2), "det_gram_moment_exact needs k <= 3 (p=1) or k <= 2 (p=2)");
  require(k <= n && n <= m && m <= kMaxDetGramDimension,
          "det_gram_moment_exact needs k <= n <= m <= " + std::to_string(kMaxDetGramDimension));
  const int order = p * k;  // Weingarten order: 2pk matrix entries
  const WeingartenTable table =
      weingarten_table(order, m, m >= order ? GramInverse::kStrict : GramInverse::kPseudo);

  std::vector<int> perm(static_cast<std::size_t>(k));
  std::vector<std::vector<int>> perms;
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  // One row slot per (copy, i); a labelling of the slots by a set partition
  // stands for every injective assignment of actual rows to its blocks.
  double total = 0.0;
  for (const auto& labels : set_partitions(static_cast<std::size_t>(order))) {
    bool ok = true;
    for (int c = 0; c < p && ok; ++c)
      for (int a = 0; a < k && ok; ++a)
        for (int b = a + 1; b < k && ok; ++b)
          if (!all_row_tuples && labels[static_cast<std::size_t>(c * k + a)] == labels[static_cast<std::size_t>(c * k + b)])
            ok = false;
    if (!ok) continue;
    const int blocks = *std::max_element(labels.begin(), labels.end()) + 1;
    if (blocks > n) continue;
    const double multiplicity = falling_factorial(n, blocks);

    // Sum over one permutation per copy.
    std::vector<std::size_t> choice(static_cast<std::size_t>(p), 0);
    while (true) {
      MomentQuery q;
      int sign = 1;
      for (int c = 0; c < p; ++c) {
        const auto& sigma = perms[choice[static_cast<std::size_t>(c)]];
        sign *= permutation_sign(sigma);
        for (int i = 0; i < k; ++i) {
          const int row = labels[static_cast<std::size_t>(c * k + i)] + 1;
          q.i_indices.push_back(row);
          q.j_indices.push_back(i + 1);
          q.i_indices.push_back(row);
          q.j_indices.push_back(sigma[static_cast<std::size_t>(i)] + 1);
        }
      }
      total += sign * multiplicity * orthogonal_moment(q, table);
      std::size_t c = 0;
      while (c < choice.size() && ++choice[c] == perms.size()) choice[c++] = 0;
      if (c == choice.size()) break;
    }
  }
  return total;
}

double sample_det_gram(int k, int n, int l, Philox& rng) {
  require(k >= 1 && k <= n, "det Gram sample needs 1 <= k <= n");
  require(l >= 0, "truncation l must be >= 0");
  if (l == 0) {
    // Columns of an orthogonal matrix are orthonormal, so Z = 1 identically.
    return 1.0;
  }
  const MatrixR b = sample_haar_columns(n + l, k, rng).topRows(n);
  const MatrixR gram = b.transpose() * b;
  return gram.determinant();
}

DetGramMoments det_gram_moment_mc(int k, int n, int l, int trials, RandomSeed seed) {
  require(trials >= 100, "det_gram_moment_mc needs at least 100 trials");
  std::vector<double> z(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Philox rng(derive_trial_seed(seed, static_cast<std::uint64_t>(t)));
    z[static_cast<std::size_t>(t)] = sample_det_gram(k, n, l, rng);
  }
  const EmpiricalSample sample(z);
  DetGramMoments out;
  out.mean = sample.mean();
  out.variance = central_moment(sample, 2);
  out.mu4 = central_moment(sample, 4);
  out.se_mean = std::sqrt(out.variance * trials / (trials - 1.0) / trials);
  return out;
}

}  // namespace rmtlab
