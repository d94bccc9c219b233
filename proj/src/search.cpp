#include "niep/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "niep/optimizer.hpp"

namespace niep {

void SearchConfig::validate() const {
  if (restarts < 1) throw InvalidConfig("restarts must be positive");
  if (max_iters < 1) throw InvalidConfig("max_iters must be positive");
  if (batch < 1) throw InvalidConfig("batch must be positive");
  if (!(objective_tol > 0.0)) throw InvalidConfig("objective_tol must be positive");
  if (!(certificate_tol > 0.0)) throw InvalidConfig("certificate_tol must be positive");
  if (!(box_bound > 0.0)) throw InvalidConfig("box_bound must be positive");
  if (!(clamp_limit >= 0.0)) throw InvalidConfig("clamp_limit must be non-negative");
  if (!(initial_damping > 0.0)) throw InvalidConfig("initial_damping must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

class Rng {
 public:
  Rng(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    engine_.seed(seq);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------

class CoefficientProblem {
 public:
  CoefficientProblem(const Spectrum& s, bool slice, double box)
      : n_(static_cast<Eigen::Index>(s.size())),
        rho_(spectral_radius(s)),
        slice_(slice),
        box_(box),
        target_(elementary_coeffs(s)) {
    const double base = rho_ > 0.0 ? rho_ : 1.0;
    inv_scale_.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) inv_scale_[i] = std::pow(base, -static_cast<double>(i + 1));
  }

  Eigen::Index size() const { return n_ * n_; }
  double rho() const { return rho_; }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& p) const {
    Eigen::MatrixXd a(n_, n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (slice_) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < n_; ++l) s += p[j * n_ + l] * p[j * n_ + l];
        s = std::max(s, 1e-300);
        for (Eigen::Index l = 0; l < n_; ++l) a(j, l) = rho_ * p[j * n_ + l] * p[j * n_ + l] / s;
      } else {
        for (Eigen::Index l = 0; l < n_; ++l) {
          const double sn = std::sin(p[j * n_ + l]);
          a(j, l) = box_ * rho_ * sn * sn;
        }
      }
    }
    return a;
  }

  /// Parameters reproducing (approximately) a given nonnegative matrix.
  Eigen::VectorXd params_for(const Eigen::MatrixXd& a, double floor) const {
    Eigen::VectorXd p(n_ * n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index l = 0; l < n_; ++l) {
        const double v = std::max(a(j, l), 0.0) + floor;
        p[j * n_ + l] = slice_ ? std::sqrt(v) : std::asin(std::sqrt(std::min(1.0, v / (box_ * rho_))));
      }
    return p;
  }

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const Eigen::MatrixXd a = matrix(p);
    const FaddeevLeVerrier fl = faddeev_leverrier(a);
    r.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      r[i] = (fl.coeffs[static_cast<std::size_t>(i)] - target_[static_cast<std::size_t>(i)]) * inv_scale_[i];
    if (!jac) return;

    jac->resize(n_, n_ * n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      // d r_i / d A = -N_{i}^T / rho^{i+1}
      const Eigen::MatrixXd g = -fl.adjugate[static_cast<std::size_t>(i)].transpose() * inv_scale_[i];
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (slice_) {
          double s = 0.0;
          for (Eigen::Index l = 0; l < n_; ++l) s += p[j * n_ + l] * p[j * n_ + l];
          s = std::max(s, 1e-300);
          const double row_dot = g.row(j).dot(a.row(j));
          for (Eigen::Index l = 0; l < n_; ++l)
            (*jac)(i, j * n_ + l) = 2.0 * p[j * n_ + l] / s * (rho_ * g(j, l) - row_dot);
        } else {
          for (Eigen::Index l = 0; l < n_; ++l)
            (*jac)(i, j * n_ + l) = g(j, l) * box_ * rho_ * std::sin(2.0 * p[j * n_ + l]);
        }
      }
    }
  }

 private:
  Eigen::Index n_;
  double rho_;
  bool slice_;
  double box_;
  CoeffVector target_;
  Eigen::VectorXd inv_scale_;
};

// ---------------------------------------------------------------------------

struct Rotation {
  Eigen::Index i, j;
};

std::vector<Rotation> rotation_order(Eigen::Index n) {
  std::vector<Rotation> out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

// S <- G(i,j,theta) S
void rotate_rows(Eigen::MatrixXd& s, const Rotation& rot, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Eigen::RowVectorXd ri = s.row(rot.i);
  const Eigen::RowVectorXd rj = s.row(rot.j);
  s.row(rot.i) = c * ri - sn * rj;
  s.row(rot.j) = sn * ri + c * rj;
}

class ConjugationProblem {
 public:
  explicit ConjugationProblem(const Spectrum& s)
      : n_(static_cast<Eigen::Index>(s.size())), rotations_(rotation_order(n_)), diag_(n_) {
    for (Eigen::Index i = 0; i < n_; ++i) diag_[i] = s[static_cast<std::size_t>(i)];
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(rotations_.size()); }

  Eigen::MatrixXd orthogonal(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(n_, n_);
    for (Eigen::Index k = size() - 1; k >= 0; --k) rotate_rows(u, rotations_[static_cast<std::size_t>(k)], theta[k]);
    return u;
  }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& theta) const {
    const Eigen::MatrixXd u = orthogonal(theta);
    return u.transpose() * diag_.asDiagonal() * u;
  }

  void operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const Eigen::MatrixXd a = matrix(theta);
    const Eigen::Index m = n_ * (n_ + 1) / 2;
    r.resize(m);
    Eigen::Index idx = 0;
    for (Eigen::Index p = 0; p < n_; ++p)
      for (Eigen::Index q = p; q < n_; ++q) r[idx++] = weight(p, q) * std::min(a(p, q), 0.0);
    if (!jac) return;

    jac->setZero(m, size());
    if (r.squaredNorm() == 0.0) return;
    // dU/dtheta_k = U W_k with W_k = S_k^T K_k S_k, S_k the product of the
    // rotations after k, hence dA/dtheta_k = A W_k - W_k A.
    Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(n_, n_);
    for (Eigen::Index k = size() - 1; k >= 0; --k) {
      const Rotation& rot = rotations_[static_cast<std::size_t>(k)];
      const Eigen::VectorXd si = suffix.row(rot.i).transpose();
      const Eigen::VectorXd sj = suffix.row(rot.j).transpose();
      const Eigen::MatrixXd w = sj * si.transpose() - si * sj.transpose();
      const Eigen::MatrixXd da = a * w - w * a;
      idx = 0;
      for (Eigen::Index p = 0; p < n_; ++p)
        for (Eigen::Index q = p; q < n_; ++q, ++idx)
          if (a(p, q) < 0.0) (*jac)(idx, k) = weight(p, q) * da(p, q);
      rotate_rows(suffix, rot, theta[k]);
    }
  }

 private:
  static double weight(Eigen::Index p, Eigen::Index q) { return p == q ? 1.0 : std::numbers::sqrt2; }

  Eigen::Index n_;
  std::vector<Rotation> rotations_;
  Eigen::VectorXd diag_;
};

// ---------------------------------------------------------------------------

struct RestartOutcome {
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double clamped = 0.0;
  std::optional<RealizationCertificate> cert;
};

template <class Problem, class Init, class Finish>
SearchResult run_restarts(const Problem& problem, const SearchConfig& cfg, Init init, Finish finish) {
  const auto started = Clock::now();
  LmOptions lm;
  lm.max_iters = cfg.max_iters;
  lm.target = cfg.objective_tol;
  lm.initial_damping = cfg.initial_damping;
  lm.polish_iters = cfg.polish_iters;

  auto run_one = [&](int restart) {
    RestartOutcome out;
    Rng rng(cfg.rng_seed, restart);
    LmObserver observer;
    if (cfg.observer) {
      observer = [&](int iter, double f, const Eigen::VectorXd& x) {
        const Eigen::MatrixXd a = problem.matrix(x);
        cfg.observer(IterateSnapshot{restart, iter, f, &a});
      };
    }
    const LmResult res = levenberg_marquardt(std::cref(problem), init(restart, rng), lm, observer);
    out.objective = res.objective;
    out.iterations = res.iterations;
    if (res.reached_target) finish(res.x, out);
    return out;
  };

  SearchResult result;
  result.verdict = Verdict::unknown();
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.batch));

  for (int first = 0; first < cfg.restarts; first += cfg.batch) {
    const int count = std::min(cfg.batch, cfg.restarts - first);
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(count));
    if (threads <= 1 || count == 1) {
      for (int k = 0; k < count; ++k) outcomes[static_cast<std::size_t>(k)] = run_one(first + k);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < std::min<unsigned>(threads, static_cast<unsigned>(count)); ++t) {
        pool.emplace_back([&] {
          for (int k = next++; k < count; k = next++) outcomes[static_cast<std::size_t>(k)] = run_one(first + k);
        });
      }
      for (auto& th : pool) th.join();
    }

    std::optional<std::size_t> winner;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const auto& o = outcomes[k];
      result.iterations += o.iterations;
      result.best_objective = std::min(result.best_objective, o.objective);
      if (o.cert && (!winner || o.objective < outcomes[*winner].objective)) winner = k;
    }
    result.restarts_used = first + count;
    if (winner) {
      auto& w = outcomes[*winner];
      result.best_objective = w.objective;
      result.clamped = w.clamped;
      result.verdict = Verdict::realizable(std::move(*w.cert));
      break;
    }
  }
  result.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

std::optional<SearchResult> trivial_outcome(const Spectrum& spectrum, const SearchConfig& cfg) {
  cfg.validate();
  if (auto proof = necessary_violation(spectrum)) {
    SearchResult r;
    r.verdict = Verdict::not_realizable(std::move(*proof));
    return r;
  }
  if (spectral_radius(spectrum) == 0.0) {
    SearchResult r;
    r.verdict = Verdict::realizable(zero_certificate(spectrum.size()));
    r.best_objective = 0.0;
    return r;
  }
  return std::nullopt;
}

/// Companion matrix brought to constant row sums by its Perron vector, when
/// the companion is nonnegative and the Perron vector positive.
std::optional<Eigen::MatrixXd> balanced_companion(const Spectrum& spectrum) {
  const CoeffVector a = elementary_coeffs(spectrum);
  if (std::any_of(a.begin(), a.end(), [](double c) { return c > 0.0; })) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) c(0, j) = -a[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) return std::nullopt;
  Eigen::Index top = 0;
  es.eigenvalues().real().maxCoeff(&top);
  Eigen::VectorXd v = es.eigenvectors().col(top).real();
  if (v.sum() < 0) v = -v;
  if (v.minCoeff() <= 1e-12 * v.maxCoeff()) return std::nullopt;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) *= v[j] / v[i];
  return c;
}

}  // namespace

SearchResult find_realization(const Spectrum& spectrum, const SearchConfig& cfg, const SquareMatrix* warm_start) {
  if (auto r = trivial_outcome(spectrum, cfg)) return std::move(*r);
  if (warm_start && warm_start->n() != spectrum.size()) throw InvalidInput("warm start has the wrong dimension");

  const CoefficientProblem problem(spectrum, cfg.use_row_sum_slice, cfg.box_bound);
  std::optional<Eigen::VectorXd> seed0;
  if (warm_start) {
    seed0 = problem.params_for(warm_start->eigen(), 1e-8 * problem.rho());
  } else if (auto c = balanced_companion(spectrum)) {
    seed0 = problem.params_for(*c, 0.0);
  }

  auto init = [&](int restart, Rng& rng) {
    if (restart == 0 && seed0) return *seed0;
    Eigen::VectorXd p(problem.size());
    const double hi = cfg.use_row_sum_slice ? 1.0 : std::numbers::pi / 2;
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = rng.uniform(0.0, hi);
    return p;
  };
  auto finish = [&](const Eigen::VectorXd& x, RestartOutcome& out) {
    auto cert = matrix_certificate(spectrum, SquareMatrix(problem.matrix(x).cwiseMax(0.0)),
                                   DeductionRule::DirectMatrix, false);
    VerifyOptions vo;
    vo.tol = cfg.certificate_tol;
    const auto report = check_certificate(cert, vo);
    if (!report) return;
    cert.residual = report.eigen_residual;
    out.cert = std::move(cert);
  };
  return run_restarts(problem, cfg, init, finish);
}

SearchResult find_symmetric_realization(const Spectrum& spectrum, const SearchConfig& cfg) {
  if (auto r = trivial_outcome(spectrum, cfg)) {
    if (r->verdict.is_realizable()) r->verdict.witness().symmetric = true;
    return std::move(*r);
  }
  const ConjugationProblem problem(spectrum);
  auto init = [&](int restart, Rng& rng) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(problem.size());
    if (restart != 0)
      for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    return theta;
  };
  auto finish = [&](const Eigen::VectorXd& x, RestartOutcome& out) {
    Eigen::MatrixXd a = problem.matrix(x);
    a = 0.5 * (a + a.transpose());
    const double most_negative = a.minCoeff();
    if (most_negative < -cfg.clamp_limit) return;
    out.clamped = std::max(0.0, -most_negative);
    auto cert = matrix_certificate(spectrum, SquareMatrix(a.cwiseMax(0.0)), DeductionRule::DirectMatrix, true);
    VerifyOptions vo;
    vo.tol = cfg.certificate_tol;
    const auto report = check_certificate(cert, vo);
    if (!report) return;
    cert.residual = report.eigen_residual;
    out.cert = std::move(cert);
  };
  return run_restarts(problem, cfg, init, finish);
}

LiftResult curve_lift(const std::vector<Spectrum>& samples, const SearchConfig& cfg, const LiftOptions& opts) {
  if (samples.empty()) throw InvalidInput("curve_lift: empty sample list");
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k].size() != samples[0].size()) throw InvalidInput("curve_lift: samples differ in dimension");
    if (l1_distance(samples[k - 1], samples[k]) > opts.max_step)
      throw InvalidInput("curve_lift: consecutive samples exceed the step bound");
  }

  LiftResult out;
  VerifyOptions vo;
  vo.tol = cfg.certificate_tol;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const RealizationCertificate* prev = out.certificates.empty() ? nullptr : &out.certificates.back();
    if (prev && prev->matrix) {
      auto reuse = matrix_certificate(samples[k], *prev->matrix, DeductionRule::DirectMatrix, prev->symmetric);
      if (const auto report = check_certificate(reuse, vo)) {
        reuse.residual = report.eigen_residual;
        out.certificates.push_back(std::move(reuse));
        continue;
      }
    }
    const SquareMatrix* warm = opts.warm_start && prev && prev->matrix ? &*prev->matrix : nullptr;
    SearchResult res = find_realization(samples[k], cfg, warm);
    out.total_iterations += res.iterations;
    out.total_restarts += res.restarts_used;
    if (!res.verdict.is_realizable() || !res.verdict.witness().matrix) {
      out.failed_index = k;
      break;
    }
    if (prev && prev->matrix) {
      const double jump = (res.verdict.witness().matrix->eigen() - prev->matrix->eigen()).cwiseAbs().maxCoeff();
      out.max_jump = std::max(out.max_jump, jump);
    }
    out.certificates.push_back(std::move(res.verdict.witness()));
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd coefficient_matrix(std::span<const double> params, const Spectrum& spectrum, bool row_sum_slice,
                                   double box_bound) {
  const CoefficientProblem problem(spectrum, row_sum_slice, box_bound);
  if (static_cast<Eigen::Index>(params.size()) != problem.size()) throw InvalidInput("expected n*n parameters");
  return problem.matrix(Eigen::Map<const Eigen::VectorXd>(params.data(), problem.size()));
}

Eigen::MatrixXd orthogonal_from_angles(std::span<const double> angles, std::size_t n) {
  const auto rot = rotation_order(static_cast<Eigen::Index>(n));
  if (angles.size() != rot.size()) throw InvalidInput("expected n(n-1)/2 angles");
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = rot.size(); k-- > 0;) rotate_rows(u, rot[k], angles[k]);
  return u;
}

namespace {

template <class Problem>
std::pair<double, std::vector<double>> evaluate(const Problem& problem, std::span<const double> params, bool grad) {
  if (static_cast<Eigen::Index>(params.size()) != problem.size()) throw InvalidInput("parameter count mismatch");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(params.data(), problem.size());
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem(x, r, grad ? &jac : nullptr);
  std::vector<double> g;
  if (grad) {
    const Eigen::VectorXd gv = 2.0 * jac.transpose() * r;
    g.assign(gv.data(), gv.data() + gv.size());
  }
  return {r.squaredNorm(), std::move(g)};
}

}  // namespace

double objective_value(ObjectiveKind kind, std::span<const double> params, const Spectrum& spectrum,
                       bool row_sum_slice) {
  if (kind == ObjectiveKind::Coefficient)
    return evaluate(CoefficientProblem(spectrum, row_sum_slice, 1.0), params, false).first;
  return evaluate(ConjugationProblem(spectrum), params, false).first;
}

std::vector<double> objective_gradient(ObjectiveKind kind, std::span<const double> params, const Spectrum& spectrum,
                                       bool row_sum_slice) {
  if (kind == ObjectiveKind::Coefficient)
    return evaluate(CoefficientProblem(spectrum, row_sum_slice, 1.0), params, true).second;
  return evaluate(ConjugationProblem(spectrum), params, true).second;
}

}  // namespace niep
