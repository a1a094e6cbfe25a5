#include "capfactor/factor_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "capfactor/error.hpp"
#include "lbfgs.hpp"
#include "oblimin.hpp"

namespace capfactor {

std::string to_string(ModelKind kind) { return kind == ModelKind::pure ? "pure" : "structured"; }
std::string to_string(DataKind kind) { return kind == DataKind::raw ? "raw" : "transformed"; }
std::string to_string(ParamCounting counting) {
  return counting == ParamCounting::published ? "published" : "identified";
}

int count_params(int p, int k, bool structured, ParamCounting counting) {
  if (p < 1 || k < 1) throw DataError("count_params needs p, k >= 1");
  const int pairs = k * (k - 1) / 2;
  const int base = k * p + p + (counting == ParamCounting::published ? pairs : -pairs);
  return base + (structured ? k : 0);
}

Matrix sample_covariance(const Matrix& values) {
  if (values.cols() < 2) throw DataError("covariance needs at least 2 observations");
  const Matrix centered = values.colwise() - values.rowwise().mean();
  return centered * centered.transpose() / static_cast<double>(values.cols());
}

Matrix joint_sample_covariance(const Matrix& values, const Vector& log_n) {
  if (log_n.size() != values.cols()) throw DataError("log_n length does not match the number of models");
  Matrix joint(values.rows() + 1, values.cols());
  joint.topRows(values.rows()) = values;
  joint.bottomRows(1) = log_n.transpose();
  return sample_covariance(joint);
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Echelon-constrained parameterization on the correlation scale.
struct Problem {
  Matrix corr;   // p x p correlation of the rows
  Vector xcorr;  // p, correlation of rows with ln(n) (structured only)
  int p = 0;
  int k = 0;
  bool structured = false;
  double bound = 1e-4;

  int n_loadings() const { return k * p - k * (k - 1) / 2; }
  int n_total() const { return n_loadings() + p + (structured ? k : 0); }

  Matrix unpack_loadings(const Vector& x) const {
    Matrix l = Matrix::Zero(p, k);
    int t = 0;
    for (int c = 0; c < k; ++c)
      for (int i = c; i < p; ++i) l(i, c) = x[t++];
    return l;
  }
  void pack_loadings(const Matrix& l, Vector& x) const {
    int t = 0;
    for (int c = 0; c < k; ++c)
      for (int i = c; i < p; ++i) x[t++] = l(i, c);
  }
  Vector uniquenesses(const Vector& x) const {
    return (x.segment(n_loadings(), p).array().exp() + bound).matrix();
  }
  Vector weights(const Vector& x) const { return x.tail(k); }

  /// Discrepancy ln|Omega| + tr(Omega^-1 S_c), S_c the (conditional) sample
  /// correlation. Infinite when Omega is not positive definite.
  double operator()(const Vector& x, Vector& grad) const {
    const Vector psi = x.segment(n_loadings(), p);
    if ((psi.array() > 60.0).any()) return std::numeric_limits<double>::infinity();
    const Matrix l = unpack_loadings(x);
    const Vector theta = uniquenesses(x);
    Matrix omega = l * l.transpose();
    omega.diagonal() += theta;
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Matrix inv = llt.solve(Matrix::Identity(p, p));
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

    Matrix sc = corr;
    Vector b;
    if (structured) {
      b = l * weights(x);
      sc.noalias() -= b * xcorr.transpose() + xcorr * b.transpose();
      sc.noalias() += b * b.transpose();
    }
    const Matrix inv_sc = inv * sc;
    const double f = logdet + inv_sc.trace();
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();

    const Matrix g = inv - inv_sc * inv;
    Matrix dl = 2.0 * g * l;
    grad.resize(x.size());
    if (structured) {
      const Vector gb = 2.0 * inv * (b - xcorr);
      dl += gb * weights(x).transpose();
      grad.tail(k) = l.transpose() * gb;
    }
    pack_loadings(dl, grad);
    grad.segment(n_loadings(), p) = g.diagonal().cwiseProduct((theta.array() - bound).matrix());
    return f;
  }
};

/// Principal-axis factoring of a covariance-like matrix.
Matrix principal_axis(const Matrix& c, int k, Vector& uniq) {
  const auto p = c.rows();
  Vector h(p);
  Eigen::LDLT<Matrix> ldlt(c);
  const Matrix cinv = ldlt.solve(Matrix::Identity(p, p));
  for (Eigen::Index i = 0; i < p; ++i) {
    const double smc = c(i, i) - 1.0 / cinv(i, i);
    h[i] = std::isfinite(smc) ? std::clamp(smc, 0.05 * c(i, i), 0.95 * c(i, i)) : 0.5 * c(i, i);
  }
  Matrix l(p, k);
  for (int it = 0; it < 100; ++it) {
    Matrix reduced = c;
    reduced.diagonal() = h;
    Eigen::SelfAdjointEigenSolver<Matrix> es(reduced);
    for (int j = 0; j < k; ++j) {
      const Eigen::Index col = p - 1 - j;
      l.col(j) = es.eigenvectors().col(col) * std::sqrt(std::max(es.eigenvalues()[col], 1e-6));
    }
    Vector next = l.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < p; ++i) next[i] = std::clamp(next[i], 0.005 * c(i, i), 0.995 * c(i, i));
    const double change = (next - h).cwiseAbs().maxCoeff();
    h = next;
    if (change < 1e-6) break;
  }
  uniq = c.diagonal() - h;
  return l;
}

/// Rotates loadings into lower-echelon form with the same L L'.
Matrix to_echelon(const Matrix& l) {
  const auto k = l.cols();
  Eigen::HouseholderQR<Matrix> qr(l.transpose());
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Matrix e = r.transpose();
  for (Eigen::Index j = 0; j < k; ++j)
    if (e(j, j) < 0.0) e.col(j) *= -1.0;
  return e;
}

// Free parameters (after rotation) may not exceed the moments. For the pure
// model this is the Ledermann bound (p - k)^2 >= p + k; the covariate adds p
// moments and k weights.
void check_shape(const Matrix& values, int k, bool structured) {
  const auto p = values.rows();
  const auto m = values.cols();
  if (k < 1) throw DataError("number of factors must be >= 1");
  if (!(m > p)) throw DataError("factor analysis needs more models than variables (m > p)");
  const auto moments = p * (p + 1) / 2 + (structured ? p : 0);
  const auto free = k * p + p + (structured ? k : 0) - k * (k - 1) / 2;
  if (k >= p || free > moments)
    throw DataError("too many factors for " + std::to_string(p) + " variables (k = " + std::to_string(k) + ")");
  if (!values.allFinite()) throw DataError("non-finite value in factor-analysis input");
}

FactorSolution fit_common(const Matrix& values, const Vector* log_n, int k, const FactorOptions& opts) {
  check_shape(values, k, log_n != nullptr);
  const int p = static_cast<int>(values.rows());
  const int m = static_cast<int>(values.cols());
  const bool structured = log_n != nullptr;

  FactorSolution sol;
  sol.model_kind = structured ? ModelKind::structured : ModelKind::pure;
  sol.data_kind = opts.data_kind;
  sol.counting = opts.counting;
  sol.sample_size = m;
  sol.means = values.rowwise().mean();
  const Matrix s = sample_covariance(values);
  sol.sds = s.diagonal().cwiseSqrt();
  for (int i = 0; i < p; ++i)
    if (!(sol.sds[i] > 0.0)) throw DataError("row " + std::to_string(i) + " is constant");
  const Vector inv_sd = sol.sds.cwiseInverse();

  Problem prob;
  prob.p = p;
  prob.k = k;
  prob.structured = structured;
  prob.bound = opts.heywood_bound;
  prob.corr = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
  prob.corr = 0.5 * (prob.corr + prob.corr.transpose());
  prob.corr.diagonal().setOnes();

  double sx = 1.0;
  if (structured) {
    if (log_n->size() != m) throw DataError("log_n length does not match the number of models");
    sol.covariate_mean = log_n->mean();
    sol.covariate_var = (log_n->array() - sol.covariate_mean).square().mean();
    if (!(sol.covariate_var > 0.0)) throw DataError("log_n is constant; structural weights are not identified");
    sx = std::sqrt(sol.covariate_var);
    const Matrix centered = values.colwise() - sol.means;
    const Vector xc = (log_n->array() - sol.covariate_mean).matrix();
    prob.xcorr = (centered * xc / static_cast<double>(m)).cwiseProduct(inv_sd) / sx;
  }

  Vector x0(prob.n_total());
  {
    Matrix start_cov = prob.corr;
    if (structured) start_cov -= prob.xcorr * prob.xcorr.transpose();
    Vector uniq;
    const Matrix l0 = to_echelon(principal_axis(start_cov, k, uniq));
    prob.pack_loadings(l0, x0);
    for (int i = 0; i < p; ++i)
      x0[prob.n_loadings() + i] = std::log(std::max(uniq[i] - prob.bound, 1e-6));
    if (structured) x0.tail(k) = l0.colPivHouseholderQr().solve(prob.xcorr);
  }

  detail::LbfgsOptions lo;
  lo.max_iter = opts.max_iter;
  lo.gtol = opts.gtol;
  const auto res = detail::minimize_lbfgs(std::cref(prob), x0, lo);
  if (!res.converged) throw NumericalError("factor model likelihood optimization did not converge");
  sol.iterations = res.iterations;
  sol.converged = res.converged;

  const Matrix l = prob.unpack_loadings(res.x);
  const Vector theta = prob.uniquenesses(res.x);
  for (int i = 0; i < p; ++i)
    if (theta[i] < 2.0 * prob.bound) sol.heywood_rows.push_back(i);

  // res.f = ln|Omega_R| + tr(Omega_R^-1 S_c); map back to the data scale.
  const double log_sd_sum = 2.0 * sol.sds.array().log().sum();
  sol.loglik = -0.5 * m * (p * kLog2Pi + res.f + log_sd_sum);
  sol.n_params = count_params(p, k, structured, opts.counting);

  Matrix rotated = l;
  Matrix phi = Matrix::Identity(k, k);
  Matrix t = Matrix::Identity(k, k);
  if (opts.rotate && k > 1) {
    const auto rot = detail::oblimin_rotate(l, opts.oblimin_gamma);
    rotated = rot.loadings;
    phi = rot.phi;
    t = rot.transform;
    sol.rotation_converged = rot.converged;
  }

  Vector w_std;
  Matrix w_cov;
  if (structured) {
    w_std = t.transpose() * prob.weights(res.x);
    Matrix omega = l * l.transpose();
    omega.diagonal() += theta;
    const Matrix info = static_cast<double>(m) * l.transpose() * omega.llt().solve(l);
    w_cov = t.transpose() * info.inverse() * t;
  }

  // Order by descending squared-loading mass; flip signs to positive column sums.
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const Vector mass = rotated.colwise().squaredNorm().transpose();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mass[a] > mass[b]; });
  Matrix perm = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    perm(src, j) = rotated.col(src).sum() < 0.0 ? -1.0 : 1.0;
  }
  rotated = rotated * perm;
  phi = perm.transpose() * phi * perm;

  sol.loadings = sol.sds.asDiagonal() * rotated;
  sol.uniquenesses = sol.sds.array().square().matrix().cwiseProduct(theta);
  sol.factor_cov = 0.5 * (phi + phi.transpose());
  if (structured) {
    sol.structural_weights = perm.transpose() * w_std / sx;
    const Matrix c = perm.transpose() * w_cov * perm;
    sol.structural_weight_se = c.diagonal().cwiseSqrt() / sx;
  }
  return sol;
}

}  // namespace

Matrix FactorSolution::total_factor_cov() const {
  if (model_kind == ModelKind::pure) return factor_cov;
  const Vector& w = *structural_weights;
  return w * w.transpose() * covariate_var + factor_cov;
}

Matrix FactorSolution::implied_covariance() const {
  Matrix yy = loadings * total_factor_cov() * loadings.transpose();
  yy.diagonal() += uniquenesses;
  if (model_kind == ModelKind::pure) return yy;
  const auto p = loadings.rows();
  Matrix out(p + 1, p + 1);
  out.topLeftCorner(p, p) = yy;
  const Vector yx = loadings * *structural_weights * covariate_var;
  out.topRightCorner(p, 1) = yx;
  out.bottomLeftCorner(1, p) = yx.transpose();
  out(p, p) = covariate_var;
  return out;
}

Matrix FactorSolution::standardized_loadings() const { return sds.cwiseInverse().asDiagonal() * loadings; }

FactorSolution fit_efa(const Matrix& values, int k, const FactorOptions& opts) {
  return fit_common(values, nullptr, k, opts);
}

FactorSolution fit_structured(const Matrix& values, const Vector& log_n, int k, const FactorOptions& opts) {
  return fit_common(values, &log_n, k, opts);
}

FitIndices compute_fit_indices(const FactorSolution& sol, const Matrix& sample_cov, int m) {
  const Matrix sigma = sol.implied_covariance();
  const auto nv = sigma.rows();
  if (sample_cov.rows() != nv || sample_cov.cols() != nv)
    throw DataError("sample covariance does not match the fitted variable set");
  if (m < 2) throw DataError("fit indices need m >= 2");

  Eigen::LLT<Matrix> llt_sigma(sigma);
  Eigen::LLT<Matrix> llt_s(sample_cov);
  if (llt_sigma.info() != Eigen::Success) throw NumericalError("implied covariance is singular");
  if (llt_s.info() != Eigen::Success) throw NumericalError("sample covariance is singular");
  const double logdet_sigma = 2.0 * llt_sigma.matrixLLT().diagonal().array().log().sum();
  const double logdet_s = 2.0 * llt_s.matrixLLT().diagonal().array().log().sum();
  const double trace = llt_sigma.solve(sample_cov).trace();
  const double f_ml = std::max(0.0, logdet_sigma + trace - logdet_s - static_cast<double>(nv));
  const double log_diag = sample_cov.diagonal().array().log().sum();
  const double f_base = std::max(0.0, log_diag - logdet_s);

  const bool structured = sol.model_kind == ModelKind::structured;
  const int p = sol.p();
  // ln(n) variance is fixed at its sample value, so it is not a free moment.
  const int moments = structured ? (p + 1) * (p + 2) / 2 - 1 : p * (p + 1) / 2;

  FitIndices fi;
  fi.chi_square = (m - 1) * f_ml;
  fi.df = moments - sol.n_params;
  fi.baseline_chi_square = (m - 1) * f_base;
  fi.baseline_df = moments - p;

  const double excess = std::max(fi.chi_square - fi.df, 0.0);
  const double denom = std::max({fi.baseline_chi_square - fi.baseline_df, fi.chi_square - fi.df, 0.0});
  fi.cfi = denom > 0.0 ? std::clamp(1.0 - excess / denom, 0.0, 1.0) : 1.0;
  fi.rmsea = fi.df > 0 ? std::sqrt(excess / (fi.df * (m - 1.0))) : 0.0;

  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < nv; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r_obs = sample_cov(i, j) / std::sqrt(sample_cov(i, i) * sample_cov(j, j));
      const double r_fit = sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
      sum_sq += (r_obs - r_fit) * (r_obs - r_fit);
    }
  fi.srmr = std::sqrt(sum_sq / (0.5 * static_cast<double>(nv * (nv + 1))));

  fi.aic = 2.0 * sol.n_params - 2.0 * sol.loglik;
  fi.bic = sol.n_params * std::log(static_cast<double>(m)) - 2.0 * sol.loglik;
  return fi;
}

Vector variance_explained(const FactorSolution& sol) {
  Vector mass = sol.standardized_loadings().colwise().squaredNorm().transpose();
  const double total = mass.sum();
  if (!(total > 0.0)) throw NumericalError("all loadings are zero");
  mass /= total;
  std::sort(mass.data(), mass.data() + mass.size(), std::greater<>());
  return mass;
}

CapabilityScores capability_scores(const FactorSolution& sol, const Matrix& values,
                                   const std::optional<Vector>& log_n) {
  if (values.rows() != sol.loadings.rows()) throw DataError("score matrix rows do not match the solution");
  const Matrix centered = values.colwise() - sol.means;
  const Matrix& lambda = sol.loadings;

  Matrix omega = lambda * sol.factor_cov * lambda.transpose();
  omega.diagonal() += sol.uniquenesses;
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw NumericalError("implied covariance is singular");

  CapabilityScores out;
  if (sol.model_kind == ModelKind::pure) {
    out.values = sol.factor_cov * lambda.transpose() * llt.solve(centered);
    return out;
  }
  if (!log_n) throw DataError("structured capability scores need log parameter counts");
  if (log_n->size() != values.cols()) throw DataError("log_n length does not match the number of models");
  const Vector& w = *sol.structural_weights;
  const RowVector xc = (log_n->array() - sol.covariate_mean).matrix().transpose();
  const Matrix expected = w * xc;  // k x m
  out.values = expected + sol.factor_cov * lambda.transpose() * llt.solve(centered - lambda * expected);
  return out;
}

double tucker_congruence(const Vector& a, const Vector& b) {
  const double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
  if (!(denom > 0.0)) return 0.0;
  return a.dot(b) / denom;
}

std::vector<double> matched_congruences(const Matrix& estimated, const Matrix& truth) {
  const auto k_true = truth.cols();
  const auto k_est = estimated.cols();
  Matrix cong(k_true, k_est);
  for (Eigen::Index a = 0; a < k_true; ++a)
    for (Eigen::Index b = 0; b < k_est; ++b)
      cong(a, b) = std::abs(tucker_congruence(truth.col(a), estimated.col(b)));

  std::vector<double> out(static_cast<std::size_t>(k_true), 0.0);
  std::vector<bool> used_true(static_cast<std::size_t>(k_true), false);
  std::vector<bool> used_est(static_cast<std::size_t>(k_est), false);
  for (Eigen::Index round = 0; round < std::min(k_true, k_est); ++round) {
    double best = -1.0;
    Eigen::Index bt = 0, be = 0;
    for (Eigen::Index a = 0; a < k_true; ++a)
      for (Eigen::Index b = 0; b < k_est; ++b)
        if (!used_true[static_cast<std::size_t>(a)] && !used_est[static_cast<std::size_t>(b)] && cong(a, b) > best) {
          best = cong(a, b);
          bt = a;
          be = b;
        }
    used_true[static_cast<std::size_t>(bt)] = true;
    used_est[static_cast<std::size_t>(be)] = true;
    out[static_cast<std::size_t>(bt)] = best;
  }
  return out;
}

}  // namespace capfactor
