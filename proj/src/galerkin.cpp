#include "charlab/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "charlab/errors.hpp"

namespace charlab {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

GalerkinSystem::GalerkinSystem(const HamiltonianSpec& spec, const GalerkinOptions& options)
    : spec_(spec),
      options_(options),
      n_(spec.surface().dim_n()),
      N_(options.mode_cut),
      Nt_(0) {
  if (N_ < 0) throw InvalidArgument("mode_cut must be >= 0 (0: automatic)");
  const double KT = spec_.K() * T();
  if (std::abs(KT - kTwoPi * std::round(KT / kTwoPi)) < 1e-6)
    throw InvalidArgument("K T lies in 2 pi Z: x -> -J x' + K x is not invertible");

  // omega: lower bound for the monotonicity of grad H*, i.e. 1 / sup eig H''_{a,K},
  // sampled over the levels from near the origin to beyond the outer blend; then halved.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = 2 * n_;
  const Hypersurface& surf = spec_.surface();
  double j_hi = spec_.aux().band_end();
  while (spec_.H_tilde(Vec(Vec::Unit(d, 0) * j_hi / surf.gauge(Vec::Unit(d, 0)))) <
         4.0 * spec_.blend_end_level())
    j_hi *= 2.0;
  const double j_lo = 1e-3;
  auto random_point = [&]() {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir(i) = normal(rng);
    return Vec(dir * (j_lo * std::pow(j_hi / j_lo, unit(rng)) / surf.gauge(dir)));
  };
  double q = std::numeric_limits<double>::infinity();
  for (int s = 0; s < options.omega_samples; ++s) {
    const Vec x = random_point();
    Eigen::SelfAdjointEigenSolver<Mat> es(spec_.H_aK_hess(x), Eigen::EigenvaluesOnly);
    q = std::min(q, 1.0 / es.eigenvalues().maxCoeff());
    Vec y = x;
    for (int i = 0; i < d; ++i) y(i) += 1e-2 * x.norm() * normal(rng);
    const Vec du = spec_.H_aK_grad(x) - spec_.H_aK_grad(y);
    if (du.norm() > 0) q = std::min(q, (x - y).dot(du) / du.squaredNorm());
  }
  if (!(q > 0.0)) throw ConstructionFailure("H*_{a,K} is not uniformly convex on the samples");
  omega_ = 0.5 * q;

  const double Lscale = kTwoPi / T();
  const int k_top = static_cast<int>(std::floor((2.0 / omega_ - spec_.K()) / Lscale));
  const int k_bottom = static_cast<int>(std::ceil(-spec_.K() / Lscale));
  if (N_ == 0) N_ = std::max(k_top, -k_bottom) + 8;
  Nt_ = options.quad_points > 0 ? options.quad_points : 8 * (N_ + 1);
  if (Nt_ < 4 * N_ + 2) throw InvalidArgument("too few quadrature points for the mode cut");
  if (k_top > N_ || k_bottom < -N_) {
    std::ostringstream os;
    os << "mode_cut " << N_ << " does not contain the threshold set (needs |k| up to "
       << std::max(k_top, -k_bottom) << ")";
    throw InvalidArgument(os.str());
  }
  for (int k = -N_; k <= N_; ++k) {
    const double lk = Lscale * k + spec_.K();
    const int base = (k + N_) * d;
    const bool in_G = lk > 0.0 && lk < 2.0 / omega_;
    if (in_G) modes_G_.push_back(k);
    for (int i = 0; i < d; ++i) (in_G ? idx_G_ : idx_P_).push_back(base + i);
  }
  for (int i = 0; i < Nt_; ++i) basis_.push_back(basis_at(T() * i / Nt_));
}

double GalerkinSystem::eigenvalue(int k) const { return -1.0 / (kTwoPi * k / T() + K()); }

Mat GalerkinSystem::basis_at(double t) const {
  const int d = 2 * n_;
  const Mat J = standard_J(n_);
  const double s = 1.0 / std::sqrt(T());
  Mat B(d, full_dim());
  for (int k = -N_; k <= N_; ++k) {
    const double L = kTwoPi * k / T();
    B.block(0, (k + N_) * d, d, d) = s * (std::cos(L * t) * Mat::Identity(d, d) + std::sin(L * t) * J);
  }
  return B;
}

std::vector<double> GalerkinSystem::nodes() const {
  std::vector<double> t(Nt_);
  for (int i = 0; i < Nt_; ++i) t[i] = T() * i / Nt_;
  return t;
}

Vec GalerkinSystem::synthesize_at(const Vec& c, double t) const { return basis_at(t) * c; }

std::vector<Vec> GalerkinSystem::synthesize(const Vec& c) const {
  std::vector<Vec> u;
  u.reserve(Nt_);
  for (const Mat& B : basis_) u.push_back(B * c);
  return u;
}

Vec GalerkinSystem::project(const std::vector<Vec>& samples) const {
  if (static_cast<int>(samples.size()) != Nt_) throw InvalidArgument("expected one sample per node");
  Vec c = Vec::Zero(full_dim());
  for (int i = 0; i < Nt_; ++i) c += basis_[i].transpose() * samples[i];
  return c * (T() / Nt_);
}

Vec GalerkinSystem::time_derivative(const Vec& c) const {
  const int d = 2 * n_;
  Vec out(c.size());
  for (int k = -N_; k <= N_; ++k) {
    const double L = kTwoPi * k / T();
    out.segment((k + N_) * d, d) = L * apply_J(c.segment((k + N_) * d, d));
  }
  return out;
}

Vec GalerkinSystem::restrict_G(const Vec& c) const {
  Vec g(idx_G_.size());
  for (std::size_t i = 0; i < idx_G_.size(); ++i) g[i] = c[idx_G_[i]];
  return g;
}

Vec GalerkinSystem::restrict_perp(const Vec& c) const {
  Vec h(idx_P_.size());
  for (std::size_t i = 0; i < idx_P_.size(); ++i) h[i] = c[idx_P_[i]];
  return h;
}

Vec GalerkinSystem::merge(const Vec& g, const Vec& h) const {
  Vec c(full_dim());
  for (std::size_t i = 0; i < idx_G_.size(); ++i) c[idx_G_[i]] = g[i];
  for (std::size_t i = 0; i < idx_P_.size(); ++i) c[idx_P_[i]] = h[i];
  return c;
}

void GalerkinSystem::evaluate(const Vec& c, double* value, Vec* grad, Mat* hess) const {
  const int d = 2 * n_;
  const double w = T() / Nt_;
  double v = 0.0;
  if (grad) grad->setZero(full_dim());
  if (hess) hess->setZero(full_dim(), full_dim());
  for (int k = -N_; k <= N_; ++k) {
    const double inv = 1.0 / (kTwoPi * k / T() + K());
    const auto ck = c.segment((k + N_) * d, d);
    v -= 0.5 * inv * ck.squaredNorm();
    if (grad) grad->segment((k + N_) * d, d) -= inv * ck;
    if (hess) hess->diagonal().segment((k + N_) * d, d).array() -= inv;
  }
  for (int i = 0; i < Nt_; ++i) {
    const Vec u = basis_[i] * c;
    const FenchelResult f = spec_.fenchel_dual(u);
    v += w * f.value;
    if (grad) grad->noalias() += w * basis_[i].transpose() * f.grad;
    if (hess) {
      const Mat SB = f.hess * basis_[i];
      hess->noalias() += w * basis_[i].transpose() * SB;
    }
  }
  if (value) *value = v;
}

double GalerkinSystem::Psi(const Vec& c) const {
  double v;
  evaluate(c, &v, nullptr, nullptr);
  return v;
}

Vec GalerkinSystem::Psi_grad(const Vec& c) const {
  Vec g;
  evaluate(c, nullptr, &g, nullptr);
  return g;
}

namespace {

Mat select(const Mat& M, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = M(rows[i], cols[j]);
  return out;
}

Vec select(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

}  // namespace

Vec GalerkinSystem::inner_solve(const Vec& g, const Vec* warm, int* iterations) const {
  Vec h = warm ? *warm : Vec(Vec::Zero(idx_P_.size()));
  const double scale = std::max(1.0, g.norm());
  double val;
  Vec grad;
  Mat hess;
  for (int it = 0; it < options_.max_inner; ++it) {
    const Vec c = merge(g, h);
    evaluate(c, &val, &grad, &hess);
    const Vec gp = select(grad, idx_P_);
    if (gp.norm() <= options_.inner_tol * scale) {
      if (iterations) *iterations = it;
      return h;
    }
    const Mat Hpp = select(hess, idx_P_, idx_P_);
    Eigen::LLT<Mat> llt(Hpp);
    if (llt.info() != Eigen::Success)
      throw NumericFailure("inner problem lost convexity on the complement of G");
    const Vec step = -llt.solve(gp);
    double lambda = 1.0;
    const double slope = gp.dot(step);
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      const Vec hn = h + lambda * step;
      const double vn = Psi(merge(g, hn));
      if (vn <= val + 1e-4 * lambda * slope || lambda * step.norm() < 1e-14 * scale) {
        h = hn;
        break;
      }
    }
  }
  const Vec gp = select(Psi_grad(merge(g, h)), idx_P_);
  if (gp.norm() <= 10 * options_.inner_tol * scale) return h;
  std::ostringstream os;
  os << "inner Newton did not converge (residual " << gp.norm() << ")";
  throw NumericFailure(os.str(), gp.norm());
}

ReducedEval GalerkinSystem::reduced(const Vec& g, const Vec* warm) const {
  ReducedEval r;
  r.h = inner_solve(g, warm, &r.inner_iterations);
  Vec grad;
  Mat hess;
  evaluate(merge(g, r.h), &r.value, &grad, &hess);
  r.grad = select(grad, idx_G_);
  const Mat Hgg = select(hess, idx_G_, idx_G_);
  const Mat Hgp = select(hess, idx_G_, idx_P_);
  const Mat Hpp = select(hess, idx_P_, idx_P_);
  r.hess = Hgg - Hgp * Hpp.llt().solve(Hgp.transpose());
  r.hess = 0.5 * (r.hess + r.hess.transpose()).eval();
  return r;
}

double GalerkinSystem::probe_perp_convexity(int pairs, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double q = std::numeric_limits<double>::infinity();
  for (int p = 0; p < pairs; ++p) {
    Vec c(full_dim());
    for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
    c *= std::pow(10.0, 2.0 * unit(rng)) / c.norm() * std::sqrt(T());
    Vec dh(idx_P_.size());
    for (int i = 0; i < dh.size(); ++i) dh[i] = normal(rng);
    dh *= std::pow(10.0, -2.0 + 2.0 * unit(rng)) * c.norm() / dh.norm();
    const Vec diff = merge(Vec::Zero(idx_G_.size()), dh);
    const Vec ga = Psi_grad(c), gb = Psi_grad(c + diff);
    q = std::min(q, (gb - ga).dot(diff) / diff.squaredNorm());
  }
  return q;
}

// ---------------------------------------------------------------------------

double parameter_a_for(const ClosedCharacteristic& orbit, double T, double ratio) {
  return orbit.normalized_period() / (ratio * T);
}

Vec galerkin_seed(const GalerkinSystem& sys, const Hypersurface& surface,
                  const ClosedCharacteristic& orbit) {
  const HamiltonianSpec& spec = sys.spec();
  const double rho = spec.rho_for_period(orbit.normalized_period());
  FlowOptions fo;
  fo.samples = sys.quad_points();
  const Trajectory tr =
      integrate_flow(homogeneous_hamiltonian(surface, 2.0), orbit.start(), orbit.prime_period, fo);
  std::vector<Vec> u;
  for (int i = 0; i < sys.quad_points(); ++i) u.push_back(spec.H_aK_grad(rho * tr.states[i]));
  return sys.project(u);
}

GalerkinCritical galerkin_critical_point(const GalerkinSystem& sys, const Hypersurface& surface,
                                         const Vec& seed) {
  Vec g = sys.restrict_G(seed);
  const Vec g_seed = g;
  Vec v = sys.restrict_G(sys.time_derivative(seed));
  if (v.norm() == 0.0) throw SearchFailure("seed has no S^1 direction (constant loop)");
  v /= v.norm();
  Vec warm = sys.restrict_perp(seed);
  const int m = static_cast<int>(g.size());

  auto bordered_residual = [&](const ReducedEval& r, const Vec& gg) {
    return std::sqrt(r.grad.squaredNorm() + std::pow((gg - g_seed).dot(v), 2));
  };

  GalerkinCritical out;
  ReducedEval R = sys.reduced(g, &warm);
  warm = R.h;
  bool converged = false;
  int it = 0;
  for (; it < 40; ++it) {
    const double scale = std::max(1.0, g.norm());
    if (R.grad.norm() <= 1e-9 * scale) {
      converged = true;
      break;
    }
    Mat A = Mat::Zero(m + 1, m + 1);
    A.topLeftCorner(m, m) = R.hess;
    A.block(0, m, m, 1) = v;
    A.block(m, 0, 1, m) = v.transpose();
    Vec rhs(m + 1);
    rhs.head(m) = -R.grad;
    rhs[m] = -(g - g_seed).dot(v);
    Vec step = A.fullPivLu().solve(rhs).head(m);
    if (step.norm() > 0.25 * scale) step *= 0.25 * scale / step.norm();
    const double r0 = bordered_residual(R, g);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 10; ++ls, lambda *= 0.5) {
      const Vec gn = g + lambda * step;
      ReducedEval Rn = sys.reduced(gn, &warm);
      if (bordered_residual(Rn, gn) < r0) {
        g = gn;
        R = std::move(Rn);
        warm = R.h;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!converged) {
    std::ostringstream os;
    os << "Galerkin Newton stalled after " << it << " iterations (|psi'| = " << R.grad.norm() << ")";
    throw SearchFailure(os.str());
  }
  out.coeffs = sys.merge(g, R.h);
  if (out.coeffs.norm() < 1e-8) throw SearchFailure("converged to the constant critical point 0");
  out.critical_value = R.value;
  out.grad_norm = R.grad.norm();
  out.iterations = it;

  Eigen::SelfAdjointEigenSolver<Mat> es(R.hess, Eigen::EigenvaluesOnly);
  const double tol = 1e-7 * es.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double e = es.eigenvalues()(i);
    if (e < -tol) ++out.morse_index;
    else if (e <= tol) ++out.nullity;
  }

  // back to the fixed-period solution x = grad H*(u) and then to (tau, y)
  const HamiltonianSpec& spec = sys.spec();
  const auto u = sys.synthesize(out.coeffs);
  double rho = 0.0;
  for (const Vec& ui : u) {
    out.x_samples.push_back(spec.fenchel_dual(ui).grad);
    rho += surface.gauge(out.x_samples.back());
  }
  rho /= u.size();
  const double tauN = spec.a() * spec.period_T() * spec.aux().ratio(rho);
  ClosedCharacteristic& c = out.orbit;
  c.provenance = Provenance::galerkin;
  c.prime_period = 0.5 * tauN;
  c.rho = spec.rho_for_period(tauN);
  c.critical_value = out.critical_value;
  c.search_iterations = it;
  const Vec y0 = out.x_samples.front() / surface.gauge(out.x_samples.front());
  constexpr int kDense = 2000;
  FlowOptions fo;
  fo.samples = kDense;
  c.trajectory = integrate_flow(homogeneous_hamiltonian(surface, 2.0), y0, c.prime_period, fo);
  // dense Galerkin curve, so that chord errors stay far below the comparison tolerance
  std::vector<Vec> ys;
  for (int i = 0; i < kDense; ++i) {
    const Vec ui = sys.synthesize_at(out.coeffs, spec.period_T() * i / kDense);
    ys.push_back(spec.fenchel_dual(ui).grad / rho);
  }
  c.galerkin_distance = hausdorff_distance(ys, c.trajectory.states);
  return out;
}

std::vector<GalerkinCritical> galerkin_critical_points(const GalerkinSystem& sys,
                                                       const Hypersurface& surface,
                                                       const std::vector<ClosedCharacteristic>& seeds) {
  std::vector<GalerkinCritical> out;
  const auto& spec = sys.spec();
  for (const auto& s : seeds) {
    const double q = s.normalized_period() / (spec.a() * spec.period_T());
    if (!(q > spec.aux().tail_limit() && q < 1.0)) continue;  // no rho for this a
    GalerkinCritical gc = galerkin_critical_point(sys, surface, galerkin_seed(sys, surface, s));
    gc.orbit.id = s.id;
    out.push_back(std::move(gc));
  }
  return out;
}

}  // namespace charlab
