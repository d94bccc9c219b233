#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "niep/conditions.hpp"

using namespace niep;

namespace {

RealizationCertificate swap_certificate() {
  return matrix_certificate(make_spectrum({1, -1}), SquareMatrix::from_row_major(2, std::vector<double>{0, 1, 1, 0}),
                            DeductionRule::DirectMatrix, true);
}

RealizationCertificate companion_certificate(std::vector<double> v) {
  Verdict verdict = companion_realizer(make_spectrum(std::move(v)));
  REQUIRE(verdict.is_realizable());
  return verdict.witness();
}

// Spectrum of a random nonnegative symmetric matrix, some entries zeroed so
// that reducible matrices show up too.
Spectrum random_realizable(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  const double density = u(rng);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = u(rng) < density ? 4.0 * u(rng) : 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  return make_spectrum(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

}  // namespace

TEST_CASE("necessary conditions") {
  auto proof = necessary_violation(make_spectrum({1, 1, -3}));
  REQUIRE(proof);
  CHECK(proof->kind == ProofKind::PerronViolation);
  CHECK(recheck_proof(*proof));

  proof = necessary_violation(make_spectrum({3, -2, -2, -2}));
  REQUIRE(proof);
  CHECK(proof->kind == ProofKind::TraceViolation);
  CHECK(proof->slack == doctest::Approx(-3.0));

  const auto results = check_necessary(make_spectrum({3, 3, -2, -2, -2}));
  for (const auto& r : results) CHECK(r.passed);
  CHECK_FALSE(necessary_violation(make_spectrum({3, 3, -2, -2, -2})));
}

TEST_CASE("partition prover") {
  Verdict v = partition_prover(make_spectrum({3, 3, -2, -2, -2}));
  REQUIRE(v.is_not_realizable());
  CHECK(v.proof().kind == ProofKind::PartitionExhaustion);
  CHECK(recheck_proof(v.proof()));
  CHECK(v.proof().trace.parts_examined > 0);

  CHECK(partition_prover(make_spectrum({1, -1})).is_unknown());
  CHECK(partition_prover(make_spectrum({0})).is_unknown());
  CHECK(partition_prover(make_spectrum({-1})).is_not_realizable());
  CHECK_THROWS_AS(partition_prover(make_spectrum(std::vector<double>(13, 1.0))), BudgetExceeded);
}

TEST_CASE("certificate verification") {
  auto id = matrix_certificate(make_spectrum({1, 1}), SquareMatrix::identity(2), DeductionRule::DirectMatrix, true);
  CHECK(verify_certificate(id));
  auto sw = swap_certificate();
  CHECK(verify_certificate(sw));
  auto neg = matrix_certificate(make_spectrum({0, 0}),
                                SquareMatrix::from_row_major(2, std::vector<double>{0, 1, -0.001, 0}),
                                DeductionRule::DirectMatrix, false);
  CHECK_FALSE(verify_certificate(neg));
  auto wrong = matrix_certificate(make_spectrum({2, 0}), SquareMatrix::identity(2), DeductionRule::DirectMatrix, false);
  CHECK_FALSE(verify_certificate(wrong));
  auto mismatch = matrix_certificate(make_spectrum({1, 1, 1}), SquareMatrix::identity(2), DeductionRule::DirectMatrix,
                                     false);
  CHECK_THROWS_AS(check_certificate(mismatch), InvalidInput);

  // Entries in (-clamp window, 0) are noise and get clamped.
  auto noisy = matrix_certificate(make_spectrum({1, -1}),
                                  SquareMatrix::from_row_major(2, std::vector<double>{-1e-14, 1, 1, 0}),
                                  DeductionRule::DirectMatrix, false);
  CHECK(verify_certificate(noisy));
  CHECK(noisy.matrix->is_nonnegative());
}

TEST_CASE("companion realizer") {
  auto c = companion_certificate({6, -2, -2, -2});
  // (x-6)(x+2)^3 = x^4 - 24x^2 - 64x - 48
  CHECK(c.matrix->row_major()[0] == doctest::Approx(0.0));
  CHECK(c.matrix->row_major()[1] == doctest::Approx(24.0));
  CHECK(c.matrix->row_major()[2] == doctest::Approx(64.0));
  CHECK(c.matrix->row_major()[3] == doctest::Approx(48.0));
  CHECK(check_certificate(c).ok);

  CHECK(companion_realizer(make_spectrum({1, 1})).is_unknown());
  Verdict zero = companion_realizer(make_spectrum({0, 0, 0}));
  REQUIRE(zero.is_realizable());
  CHECK(zero.witness().matrix->is_nonnegative());
}

TEST_CASE("property: one-sidedness of the exact oracles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(1 + trial % 6));
    for (auto& x : v) x = u(rng);
    const Spectrum s = make_spectrum(v);
    CHECK_FALSE(companion_realizer(s).is_not_realizable());
    CHECK_FALSE(partition_prover(s).is_realizable());
  }
}

TEST_CASE("property: the prover is sound on 1000 realizable spectra") {
  std::mt19937_64 rng(12);
  int refuted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Spectrum s = random_realizable(rng, 1 + trial % 8);
    if (partition_prover(s).is_not_realizable()) ++refuted;
    if (necessary_violation(s)) ++refuted;
  }
  CHECK(refuted == 0);
}

TEST_CASE("corollary-1 steps") {
  const auto zero = zero_certificate(4);
  const std::vector<double> eps{6, -2, -2, -2};
  const auto c = corollary1_step(zero, eps);
  CHECK(c.spectrum.values() == std::vector<double>{6, -2, -2, -2});
  CHECK(c.is_deduction());
  CHECK(check_certificate(c).ok);
  REQUIRE(c.provenance.size() == 2);
  CHECK(c.provenance.back().rule == DeductionRule::Corollary1);

  const auto sw = swap_certificate();
  const auto same = corollary1_step(sw, std::vector<double>{0, 0});
  CHECK(same.spectrum == sw.spectrum);

  try {
    corollary1_step(zero_certificate(4), std::vector<double>{1, -2, 0, 0});
    FAIL("expected a constraint violation");
  } catch (const ConstraintViolation& e) {
    CHECK(e.required() == 2.0);
  }
  CHECK_THROWS_AS(corollary1_step(zero_certificate(4), std::vector<double>{0, 0}), InvalidInput);

  auto bogus = matrix_certificate(make_spectrum({2, 0}), SquareMatrix::identity(2), DeductionRule::DirectMatrix, false);
  CHECK_THROWS_AS(corollary1_step(bogus, std::vector<double>{0, 0}), InvalidInput);
}

TEST_CASE("corollary-1 step on a perturbed spectrum") {
  const double t = 0.9, k = 40;
  // (3 + t, 3, -2, -2, -2) is certified through the zero base here; any
  // certified base works the same way.
  auto base = reach(zero_certificate(5), make_spectrum({3 + t + 9, 3, -2, -2, -2}));
  REQUIRE(base);
  const std::vector<double> eps{7 / k, 1 / k, 1 / k, 2 / k, 3 / k};
  const auto sigma = corollary1_step(*base, eps);
  const std::vector<double> want{3 + t + 9 + 7 / k, 3 + 1 / k, -2 + 3 / k, -2 + 2 / k, -2 + 1 / k};
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(sigma.spectrum[i] == doctest::Approx(want[i]));
  CHECK(check_certificate(sigma).ok);
}

TEST_CASE("perron raise") {
  auto c = companion_certificate({6, -2, -2, -2});
  auto raised = perron_raise(c, 1.0);
  CHECK(raised.spectrum.values() == std::vector<double>{7, -2, -2, -2});
  CHECK(check_certificate(raised).ok);

  const auto sw = swap_certificate();
  CHECK(perron_raise(sw, 0.0).spectrum == sw.spectrum);
  // Constant row sums: the raise stays a matrix certificate.
  CHECK(perron_raise(sw, 0.5).matrix.has_value());
  CHECK(check_certificate(perron_raise(sw, 0.5)).ok);

  CHECK_THROWS_AS(perron_raise(sw, -0.1), ConstraintViolation);
}

TEST_CASE("reachability") {
  auto base = companion_certificate({6, -2, -2, -2});
  CHECK(reachable(base.spectrum, make_spectrum({7, -2, -2, -1.5})));
  CHECK_FALSE(reachable(base.spectrum, make_spectrum({6, -1, -2, -2})));
  auto r = reach(base, make_spectrum({7, -2, -2, -1.5}));
  REQUIRE(r);
  CHECK(r->spectrum.values() == std::vector<double>{7, -1.5, -2, -2});
  CHECK(check_certificate(*r).ok);

  const std::vector<double> tail{3, -1, 2.5, -4};
  double mass = 0.0;
  for (double x : tail) mass += std::abs(x);
  const Spectrum top = make_spectrum({mass, 3, -1, 2.5, -4});
  auto z = reach(zero_certificate(5), top);
  REQUIRE(z);
  CHECK(z->spectrum == top);
  CHECK(check_certificate(*z).ok);

  CHECK_THROWS_AS(reachable(make_spectrum({1}), make_spectrum({1, 0})), InvalidInput);
}

TEST_CASE("property: reflexivity and transitivity of reach") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    auto base = companion_certificate({6, -2, -2, -2});
    CHECK(reachable(base.spectrum, base.spectrum));
    std::vector<double> a = base.spectrum.values(), b;
    double m1 = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
      const double e = 0.2 * u(rng);
      a[i] += e;
      m1 += std::abs(e);
    }
    a[0] += m1 + 0.1 * std::abs(u(rng));
    b = a;
    double m2 = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
      const double e = 0.2 * u(rng);
      b[i] += e;
      m2 += std::abs(e);
    }
    b[0] += m2;
    const Spectrum sa = make_spectrum(a), sb = make_spectrum(b);
    auto ra = reach(base, sa);
    REQUIRE(ra);
    auto rb = reach(*ra, sb);
    REQUIRE(rb);
    CHECK(check_certificate(*rb).ok);
    CHECK(reachable(base.spectrum, sb));
  }
}

TEST_CASE("property: corollary-1 closure keeps the necessary conditions") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<std::vector<double>> bases{{6, -2, -2, -2}, {4, -1, -1, -1, -1}, {2, 0, -1}};
    const auto& bv = bases[static_cast<std::size_t>(trial) % bases.size()];
    auto base = companion_certificate(bv);
    std::vector<double> eps(bv.size());
    for (std::size_t i = 1; i < eps.size(); ++i) {
      eps[i] = u(rng);
      eps[0] += std::abs(eps[i]);
    }
    const auto c = corollary1_step(base, eps);
    CHECK_FALSE(necessary_violation(c.spectrum));
    CHECK(check_certificate(c).ok);
  }
}
