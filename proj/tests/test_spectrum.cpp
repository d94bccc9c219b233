#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "niep/spectrum.hpp"

using namespace niep;

namespace {

// (-1)^i e_i by summing over all index subsets.
CoeffVector brute_force_coeffs(const std::vector<double>& v) {
  const std::size_t n = v.size();
  CoeffVector out(n, 0.0);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double prod = 1.0;
    int bits = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1u << k)) {
        prod *= v[k];
        ++bits;
      }
    out[static_cast<std::size_t>(bits - 1)] += (bits % 2 ? -1.0 : 1.0) * prod;
  }
  return out;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("make_spectrum sorts and validates") {
  CHECK(make_spectrum({-2, 3, -2, 3, -2}).values() == std::vector<double>{3, 3, -2, -2, -2});
  CHECK(make_spectrum({5}).values() == std::vector<double>{5});
  CHECK(make_spectrum({1, 1, 1}).values() == std::vector<double>{1, 1, 1});
  CHECK_THROWS_AS(make_spectrum({}), InvalidInput);
  CHECK_THROWS_AS(make_spectrum({1, NAN}), InvalidInput);
  CHECK_THROWS_AS(make_spectrum({1, INFINITY}), InvalidInput);
}

TEST_CASE("elementary coefficients") {
  CHECK(elementary_coeffs(make_spectrum({1, -1})) == CoeffVector{0, -1});
  CHECK(elementary_coeffs(make_spectrum({2, 1})) == CoeffVector{-3, 2});
  const std::vector<double> v{3, 3, -2, -2, -2};
  const CoeffVector a = elementary_coeffs(make_spectrum(v));
  CHECK(a[0] == 0.0);
  const CoeffVector oracle = brute_force_coeffs(v);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(oracle[i]).epsilon(1e-14));
}

TEST_CASE("characteristic coefficients") {
  CHECK(char_coeffs(SquareMatrix::identity(2)) == CoeffVector{-2, 1});
  CHECK(char_coeffs(SquareMatrix::from_row_major(2, std::vector<double>{0, 1, 1, 0})) == CoeffVector{0, -1});
  const std::vector<double> v{3, 3, -2, -2, -2};
  const CoeffVector c = char_coeffs(SquareMatrix::diagonal(v));
  const CoeffVector a = elementary_coeffs(make_spectrum(v));
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(a[i]).epsilon(1e-12));
}

TEST_CASE("eigenvalues") {
  auto ev = eigenvalues(SquareMatrix::diagonal(std::vector<double>{4, 3, -2, -2, -2}));
  const std::vector<double> want{4, 3, -2, -2, -2};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(ev[i].real() == doctest::Approx(want[i]));
    CHECK(std::abs(ev[i].imag()) < 1e-12);
  }
  ev = eigenvalues(SquareMatrix::from_row_major(2, std::vector<double>{0, 1, 1, 0}));
  CHECK(ev[0].real() == doctest::Approx(1.0));
  CHECK(ev[1].real() == doctest::Approx(-1.0));
  ev = eigenvalues(SquareMatrix(Eigen::MatrixXd::Ones(5, 5)));
  CHECK(ev[0].real() == doctest::Approx(5.0));
  for (std::size_t i = 1; i < 5; ++i) CHECK(std::abs(ev[i]) < 1e-12);
}

TEST_CASE("spectral radius and power sums") {
  CHECK(spectral_radius(make_spectrum({3, -2, -2, -2})) == 3.0);
  CHECK(spectral_radius(make_spectrum({1, -4})) == 4.0);
  CHECK(spectral_radius(make_spectrum({3, 3, -2, -2, -2})) == 3.0);
  CHECK(power_sums(make_spectrum({3, 3, -2, -2, -2}), 3) == std::vector<double>{0, 30, 30});
  CHECK(power_sums(make_spectrum({1, -1}), 2) == std::vector<double>{0, 2});
  CHECK(power_sums(make_spectrum({0, 0, 0}), 4) == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("l1 distance") {
  const std::vector<double> base{3, -2, -2, -2};
  CHECK(l1_distance(base, base) == 0.0);
  const std::vector<double> k4{3 + 0.25, -2 + 0.25, -2 - 0.5, -2 + 0.75};
  CHECK(l1_distance(base, k4) == doctest::Approx(1.75));
  CHECK(l1_distance(std::vector<double>{0, 0}, std::vector<double>{1, -1}) == 2.0);
  CHECK_THROWS_AS(l1_distance(std::vector<double>{0}, std::vector<double>{1, -1}), InvalidInput);
}

TEST_CASE("property: permutation invariance of elementary coefficients") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = random_values(rng, 1 + trial % 8, -10, 10);
    const CoeffVector a = elementary_coeffs(make_spectrum(v));
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(elementary_coeffs(make_spectrum(v)) == a);
  }
}

TEST_CASE("property: similarity invariance under permutations") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + trial % 8);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = std::uniform_real_distribution<double>(-3, 3)(rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
    const CoeffVector c1 = char_coeffs(SquareMatrix(a));
    const CoeffVector c2 = char_coeffs(SquareMatrix(p * a * p.transpose()));
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(std::abs(c1[i] - c2[i]) <= 1e-9 * std::max(1.0, std::abs(c1[i])));
  }
}

TEST_CASE("property: diagonal matrices satisfy the defining equations") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = random_values(rng, 1 + trial % 8, -10, 10);
    const CoeffVector c = char_coeffs(SquareMatrix::diagonal(v));
    const CoeffVector a = elementary_coeffs(make_spectrum(v));
    const CoeffVector oracle = brute_force_coeffs(v);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double scale = std::max(1.0, std::abs(a[i]));
      CHECK(std::abs(c[i] - a[i]) <= 1e-10 * scale);
      CHECK(std::abs(oracle[i] - a[i]) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("property: Newton identities") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = random_values(rng, 1 + trial % 8, -10, 10);
    const Spectrum s = make_spectrum(v);
    const std::size_t n = s.size();
    const CoeffVector a = elementary_coeffs(s);
    const auto p = power_sums(s, static_cast<int>(n));
    // p_k + a_1 p_{k-1} + ... + a_{k-1} p_1 + k a_k = 0
    for (std::size_t k = 1; k <= n; ++k) {
      double lhs = p[k - 1] + static_cast<double>(k) * a[k - 1];
      double scale = std::abs(p[k - 1]) + std::abs(static_cast<double>(k) * a[k - 1]);
      for (std::size_t i = 1; i < k; ++i) {
        lhs += a[i - 1] * p[k - i - 1];
        scale += std::abs(a[i - 1] * p[k - i - 1]);
      }
      CHECK(std::abs(lhs) <= 1e-9 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("property: eigenvalues are roots of the characteristic polynomial") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + trial % 8);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = std::uniform_real_distribution<double>(-2, 2)(rng);
    const SquareMatrix m(a);
    const CoeffVector c = char_coeffs(m);
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double bound = 1e-7 * std::max(1.0, std::pow(norm, static_cast<double>(n)));
    const auto ev = eigenvalues(m);
    for (std::size_t i = 1; i < ev.size(); ++i) {
      CHECK(ev[i - 1].real() >= ev[i].real());
      CHECK(std::abs(evaluate_monic(c, ev[i])) <= bound);
    }
  }
}

TEST_CASE("canonical text round-trips") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Spectrum s = make_spectrum(random_values(rng, 1 + trial % 6, -10, 10));
    const std::string text = to_string(s);
    std::vector<double> back;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t next = text.find(',', pos);
      if (next == std::string::npos) next = text.size();
      back.push_back(std::stod(text.substr(pos, next - pos)));
      pos = next + 1;
    }
    CHECK(make_spectrum(back) == s);
  }
}
