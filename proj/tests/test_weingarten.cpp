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

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/weingarten.hpp"
#include "support.hpp"

using namespace rmtlab;

namespace {

PairMatching matching(std::vector<std::pair<int, int>> pairs) {
  PairMatching m;
  m.k = static_cast<int>(pairs.size());
  m.pairs = std::move(pairs);
  return m;
}

double wg_identity_k2(double m) { return (m + 1.0) / (m * (m - 1.0) * (m + 2.0)); }
double wg_swap_k2(double m) { return -1.0 / (m * (m - 1.0) * (m + 2.0)); }

}  // namespace

TEST_CASE("matching enumeration") {
  const std::vector<std::size_t> counts{1, 3, 15, 105, 945};
  for (int k = 1; k <= 5; ++k) CHECK(enumerate_matchings(k).size() == counts[static_cast<std::size_t>(k - 1)]);
  const auto k1 = enumerate_matchings(1);
  CHECK(k1[0].to_string() == "(1,2)");
  const auto k2 = enumerate_matchings(2);
  CHECK(k2[0].to_string() == "(1,2)(3,4)");
  CHECK(k2[1].to_string() == "(1,3)(2,4)");
  CHECK(k2[2].to_string() == "(1,4)(2,3)");
  CHECK(enumerate_matchings(3) == enumerate_matchings(3));
  for (int k : {0, 6})
    CHECK(testing::error_code_of([k] { enumerate_matchings(k); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("matchings round-trip through partner arrays") {
  for (const auto& m : enumerate_matchings(4)) CHECK(matching_from_partners(m.partners()) == m);
  CHECK(testing::error_code_of([] { matching_from_partners({1, 0, 2}); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { matching_from_partners({1, 2, 0, 3}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("loop counting") {
  const auto a = matching({{1, 2}, {3, 4}});
  CHECK(loops_between(a, a) == 2);
  CHECK(loops_between(a, matching({{1, 3}, {2, 4}})) == 1);
  CHECK(loops_between(a, matching({{1, 4}, {2, 3}})) == 1);
  for (const auto& x : enumerate_matchings(3)) {
    CHECK(loops_between(x, x) == 3);
    for (const auto& y : enumerate_matchings(3)) {
      CHECK(loops_between(x, y) >= 1);
      CHECK(loops_between(x, y) <= 3);
      CHECK(loops_between(x, y) == loops_between(y, x));
    }
  }
  CHECK(testing::error_code_of([&] { loops_between(a, matching({{1, 2}})); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("reduced coset types") {
  const auto a = matching({{1, 2}, {3, 4}});
  CHECK(reduced_coset_type(a, a).parts.empty());
  CHECK(reduced_coset_type(a, a).to_string() == "(0)");
  CHECK(reduced_coset_type(a, matching({{1, 3}, {2, 4}})).parts == std::vector<int>{1});
  const auto b = matching({{1, 2}, {3, 4}, {5, 6}});
  const auto c = matching({{1, 2}, {3, 5}, {4, 6}});
  CHECK(reduced_coset_type(b, c).parts == std::vector<int>{1});
  const auto d = matching({{1, 3}, {2, 5}, {4, 6}});
  CHECK(reduced_coset_type(b, d).parts == std::vector<int>{2});
  CHECK(reduced_coset_type(b, d).weight() == 2);
  const auto e = matching({{1, 4}, {2, 3}, {5, 8}, {6, 7}});
  const auto f = matching({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
  CHECK(reduced_coset_type(f, e).to_string() == "(1,1)");
  CHECK(testing::error_code_of([&] { reduced_coset_type(a, b); }) == ErrorCode::kInvalidArgument);
  // Weight plus number of loops is k.
  for (const auto& x : enumerate_matchings(4))
    for (const auto& y : enumerate_matchings(4)) CHECK(reduced_coset_type(x, y).weight() + loops_between(x, y) == 4);
}

TEST_CASE("small Weingarten tables in closed form") {
  for (int m = 1; m <= 12; ++m) {
    const auto t = weingarten_table(1, m);
    CHECK(t.values(0, 0) == doctest::Approx(1.0 / m).epsilon(1e-14));
  }
  for (int m = 2; m <= 16; ++m) {
    const auto t = weingarten_table(2, m);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(t.values(a, b) == doctest::Approx(a == b ? wg_identity_k2(m) : wg_swap_k2(m)).epsilon(1e-12));
  }
  const auto t6 = weingarten_table(2, 6);
  CHECK(std::abs(t6.values(0, 0) - 7.0 / 240.0) <= 1e-12);
  CHECK(std::abs(t6.values(0, 1) + 1.0 / 240.0) <= 1e-12);
}

TEST_CASE("Weingarten tables invert the Gram matrix") {
  for (int k = 1; k <= 4; ++k) {
    for (int m = 2 * k; m <= 16; ++m) {
      CAPTURE(k);
      CAPTURE(m);
      const auto t = weingarten_table(k, m);
      const auto size = t.gram.rows();
      CHECK(t.values.rows() == static_cast<Eigen::Index>(enumerate_matchings(k).size()));
      CHECK((t.values * t.gram - Eigen::MatrixXd::Identity(size, size)).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((t.values - t.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK_FALSE(t.pseudo_inverse);
    }
  }
}

TEST_CASE("singular Gram matrices") {
  CHECK(testing::error_code_of([] { weingarten_table(3, 2); }) == ErrorCode::kSingularGram);
  CHECK(testing::error_code_of([] { weingarten_table(2, 1); }) == ErrorCode::kSingularGram);
  const auto t = weingarten_table(3, 2, GramInverse::kPseudo);
  CHECK(t.pseudo_inverse);
  CHECK((t.gram * t.values * t.gram - t.gram).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(testing::error_code_of([] { weingarten_table(5, 10); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { weingarten_table(1, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("exact rational tables") {
  const auto t = weingarten_table_exact(2, 6);
  CHECK(t.values[0][0] == "7/240");
  CHECK(t.values[0][1] == "-1/240");
  CHECK(t.as_double[0][0] == 7.0 / 240.0);
  for (int k = 1; k <= 3; ++k) {
    for (int m = k; m <= 10; ++m) {
      const auto exact = weingarten_table_exact(k, m);
      const auto approx = weingarten_table(k, m);
      for (std::size_t a = 0; a < exact.matchings.size(); ++a)
        for (std::size_t b = 0; b < exact.matchings.size(); ++b)
          CHECK(approx.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) ==
                doctest::Approx(exact.as_double[a][b]).epsilon(1e-11));
    }
  }
  CHECK(testing::error_code_of([] { weingarten_table_exact(4, 8); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { weingarten_table_exact(3, 2); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Weingarten values depend only on the coset type") {
  // Exact equality through the rational tables.
  for (int k = 1; k <= 3; ++k) {
    for (int m : {k, k + 1, 2 * k, 9}) {
      const auto t = weingarten_table_exact(k, m);
      std::map<std::string, std::string> seen;
      for (std::size_t a = 0; a < t.matchings.size(); ++a) {
        for (std::size_t b = 0; b < t.matchings.size(); ++b) {
          const auto mu = reduced_coset_type(t.matchings[a], t.matchings[b]).to_string();
          auto [it, inserted] = seen.try_emplace(mu, t.values[a][b]);
          CHECK(it->second == t.values[a][b]);
        }
      }
    }
  }
  // Floating-point tables at k = 4 agree to rounding.
  for (int m : {8, 12, 16}) {
    const auto t = weingarten_table(4, m);
    std::map<std::string, double> seen;
    for (std::size_t a = 0; a < t.matchings.size(); ++a) {
      for (std::size_t b = 0; b < t.matchings.size(); ++b) {
        const double v = t.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        auto [it, inserted] = seen.try_emplace(reduced_coset_type(t.matchings[a], t.matchings[b]).to_string(), v);
        CHECK(std::abs(it->second - v) <= 1e-13 * std::abs(t.values(0, 0)));
      }
    }
    CHECK(seen.size() == 5);  // (0), (1), (2), (1,1), (3)
  }
}

TEST_CASE("Weingarten values by coset type") {
  CHECK(weingarten_value({}, 2, 6) == doctest::Approx(7.0 / 240.0).epsilon(1e-12));
  CHECK(weingarten_value({{1}}, 2, 6) == doctest::Approx(-1.0 / 240.0).epsilon(1e-12));
  for (int m = 1; m <= 10; ++m) CHECK(weingarten_value({}, 1, m) == doctest::Approx(1.0 / m));
  CHECK(testing::error_code_of([] { weingarten_value({{2}}, 2, 6); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { weingarten_value({{1, 1}}, 3, 6); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { weingarten_value({{0}}, 2, 6); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Catalan numbers") {
  CHECK(catalan(0) == 1);
  CHECK(catalan(1) == 1);
  CHECK(catalan(3) == 5);
  CHECK(catalan(4) == 14);
  CHECK(catalan(20) == 6564120420ull);
  for (int j : {-1, 21}) CHECK(testing::error_code_of([j] { catalan(j); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("three-term Weingarten expansions") {
  CHECK(wg_asymptotic({}, 2, 10) == doctest::Approx(0.01018).epsilon(1e-12));
  CHECK(wg_asymptotic({{1}}, 2, 10) == doctest::Approx(-0.00093).epsilon(1e-12));
  CHECK(weingarten_value({}, 2, 10) == doctest::Approx(11.0 / 1080.0).epsilon(1e-12));
  // Exact k = 2 value is m^-2 + 2 m^-4 - 2 m^-5 + 6 m^-6 - ..., so the
  // remainder scaled by m^6 tends to 6.
  double previous = 0.0;
  for (int m : {16, 32, 64, 128, 256}) {
    const double scaled = std::abs(weingarten_value({}, 2, m) - wg_asymptotic({}, 2, m)) * std::pow(m, 6);
    CHECK(scaled > previous);
    CHECK(scaled < 6.0);
    previous = scaled;
  }
  CHECK(previous > 5.9);
  // Coset type (1) at k = 2: exact -1/(m(m-1)(m+2)) = -m^-3 + m^-4 - 3 m^-5 + ...
  for (int m : {16, 32, 64}) {
    const double diff = std::abs(weingarten_value({{1}}, 2, m) - wg_asymptotic({{1}}, 2, m));
    CHECK(diff <= 6.0 * std::pow(m, -6));
  }
}

TEST_CASE("leading-order Catalan asymptotics") {
  const int m = 400;
  for (const auto& [mu, k] : std::vector<std::pair<ReducedCosetType, int>>{
           {{{2}}, 3}, {{{1, 1}}, 4}, {{{3}}, 4}, {{{1}}, 3}, {{}, 4}}) {
    const double exact = weingarten_value(mu, k, m);
    const double lead = wg_asymptotic(mu, k, m, 1);
    CAPTURE(mu.to_string());
    CHECK(exact / lead == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("orthogonal moments") {
  for (int m = 1; m <= 9; ++m) CHECK(orthogonal_moment({{1, 1}, {1, 1}}, m) == doctest::Approx(1.0 / m));
  CHECK(orthogonal_moment({{1, 1, 2, 2}, {1, 1, 2, 2}}, 6) == doctest::Approx(7.0 / 240.0).epsilon(1e-12));
  CHECK(orthogonal_moment({{1, 1, 2, 2}, {1, 2, 1, 2}}, 6) == doctest::Approx(-1.0 / 240.0).epsilon(1e-12));
  // E g_11^4 = 3 / (m (m + 2)).
  for (int m = 2; m <= 8; ++m)
    CHECK(orthogonal_moment({{1, 1, 1, 1}, {1, 1, 1, 1}}, m) == doctest::Approx(3.0 / (m * (m + 2.0))).epsilon(1e-12));
  CHECK(orthogonal_moment({{}, {}}, 5) == 1.0);
  CHECK(orthogonal_moment({{1, 1, 1}, {1, 1, 1}}, 5) == 0.0);
  CHECK(orthogonal_moment({{1, 2, 3, 4}, {1, 1, 1, 1}}, 6) == 0.0);
  CHECK(orthogonal_moment({{1, 1, 1, 2}, {1, 1, 1, 1}}, 6) == 0.0);
  CHECK(testing::error_code_of([] { orthogonal_moment({{1, 1}, {1}}, 4); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { orthogonal_moment({{1, 5}, {1, 1}}, 4); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] {
          orthogonal_moment({std::vector<int>(10, 1), std::vector<int>(10, 1)}, 6);
        }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("row normalization closes") {
  for (int m : {2, 3, 5, 8}) {
    double total = 0.0;
    for (int j = 1; j <= m; ++j) total += orthogonal_moment({{1, 1}, {j, j}}, m);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    // Fourth order: sum_j E g_1j^2 g_2j'^2 over all j, j' equals 1 as well.
    double fourth = 0.0;
    for (int j = 1; j <= m; ++j)
      for (int jj = 1; jj <= m; ++jj) fourth += orthogonal_moment({{1, 1, 2, 2}, {j, j, jj, jj}}, m);
    CHECK(std::abs(fourth - 1.0) <= 1e-12);
  }
}

TEST_CASE("moment patterns") {
  for (int order : {2, 4, 6}) {
    const auto patterns = moment_patterns(order);
    CHECK_FALSE(patterns.empty());
    for (const auto& q : patterns) {
      CHECK(q.i_indices.size() == static_cast<std::size_t>(order));
      CHECK(q.i_indices.front() == 1);
      CHECK(orthogonal_moment(q, 8) != 0.0);
    }
  }
  CHECK(moment_patterns(2).size() == 1);
  CHECK(moment_patterns(4).size() == 5);
  CHECK(testing::error_code_of([] { moment_patterns(3); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { moment_patterns(8); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("exact moments agree with Haar sampling") {
  for (int m : {4, 6, 8}) {
    for (int order : {2, 4, 6}) {
      const auto queries = moment_patterns(order);
      const auto mc = orthogonal_moment_mc(queries, m, 100000, RandomSeed{static_cast<std::uint64_t>(1000 * m + order)});
      for (std::size_t q = 0; q < queries.size(); ++q) {
        CAPTURE(m);
        CAPTURE(order);
        CAPTURE(q);
        CHECK(std::abs(mc[q].mean - orthogonal_moment(queries[q], m)) <= 3.0 * mc[q].standard_error);
      }
    }
  }
}

TEST_CASE("determinant moments in closed form") {
  for (int m = 2; m <= 12; ++m)
    for (int n = 1; n <= m; ++n) CHECK(det_gram_moment_exact(1, n, m, 1) == doctest::Approx(static_cast<double>(n) / m));
  for (int n = 1; n <= 8; ++n) {
    CHECK(det_gram_moment_exact(1, n, n, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(det_gram_moment_exact(1, n, n, 2) == doctest::Approx(1.0).epsilon(1e-12));
    if (n >= 2) {
      CHECK(det_gram_moment_exact(2, n, n, 1) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(det_gram_moment_exact(2, n, n, 2) == doctest::Approx(1.0).epsilon(1e-12));
    }
    if (n >= 3) CHECK(det_gram_moment_exact(3, n, n, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(std::abs(det_gram_moment_exact(2, 6, 8, 1) - 15.0 / 28.0) <= 1e-10);
  for (int m = 3; m <= 12; ++m)
    for (int n = 2; n <= m; ++n)
      CHECK(det_gram_moment_exact(2, n, m, 1) == doctest::Approx(n * (n - 1.0) / (m * (m - 1.0))).epsilon(1e-11));
  // k = 1, p = 2: Z is Beta(n/2, l/2), so E Z^2 = n (n + 2) / (m (m + 2)).
  for (int m = 2; m <= 12; ++m)
    for (int n = 1; n <= m; ++n)
      CHECK(det_gram_moment_exact(1, n, m, 2) == doctest::Approx(n * (n + 2.0) / (m * (m + 2.0))).epsilon(1e-11));
  // k = 3, p = 1: product of Beta means along a Gram-Schmidt chain.
  for (int m = 4; m <= 9; ++m)
    for (int n = 3; n <= m; ++n)
      CHECK(det_gram_moment_exact(3, n, m, 1) ==
            doctest::Approx(n * (n - 1.0) * (n - 2.0) / (m * (m - 1.0) * (m - 2.0))).epsilon(1e-10));
}

TEST_CASE("distinct-row sums equal unrestricted sums") {
  for (auto [k, n, m, p] : std::vector<std::array<int, 4>>{{2, 3, 5, 1}, {2, 4, 6, 2}, {3, 4, 6, 1}, {1, 3, 7, 2}})
    CHECK(det_gram_moment_exact(k, n, m, p, true) == doctest::Approx(det_gram_moment_exact(k, n, m, p)).epsilon(1e-10));
}

TEST_CASE("determinant moment preconditions") {
  CHECK(testing::error_code_of([] { det_gram_moment_exact(3, 4, 6, 2); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { det_gram_moment_exact(4, 4, 6, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { det_gram_moment_exact(2, 6, 5, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { det_gram_moment_exact(2, 1, 5, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { det_gram_moment_exact(1, 3, 65, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(testing::error_code_of([] { det_gram_moment_exact(1, 3, 5, 3); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("determinant moments by sampling") {
  auto z = det_gram_moment_mc(2, 6, 0, 1000, RandomSeed{1});
  CHECK(z.mean == 1.0);
  CHECK(z.variance == 0.0);
  z = det_gram_moment_mc(2, 6, 2, 100000, RandomSeed{2});
  CHECK(std::abs(z.mean - 15.0 / 28.0) <= 3.0 * z.se_mean);
  z = det_gram_moment_mc(1, 4, 4, 100000, RandomSeed{3});
  CHECK(std::abs(z.mean - 0.5) <= 3.0 * z.se_mean);
  // Beta(2, 2) variance 1/20.
  CHECK(z.variance == doctest::Approx(0.05).epsilon(0.03));
  CHECK(testing::error_code_of([] { det_gram_moment_mc(1, 4, 4, 99, RandomSeed{1}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("determinant variance shrinks like 1/n") {
  std::vector<double> scaled;
  for (int n : {8, 16, 32}) {
    const double mean = det_gram_moment_exact(2, n, n + 2, 1);
    scaled.push_back(n * (det_gram_moment_exact(2, n, n + 2, 2) - mean * mean));
  }
  for (double s : scaled) {
    CHECK(s <= 2.0 * scaled.back());
    CHECK(s >= 0.5 * scaled.back());
  }
}

TEST_CASE("table CSV") {
  std::ostringstream out;
  write_table_csv(weingarten_table(2, 6), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "matching_a,matching_b,loops,reduced_coset_type,value");
  std::getline(in, line);
  CHECK(line == "(1,2)(3,4),(1,2)(3,4),2,\"(0)\",0.029166666666666667");
  std::getline(in, line);
  CHECK(line.rfind("(1,2)(3,4),(1,3)(2,4),1,\"(1)\",", 0) == 0);
  int rows = 2;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9);
}
