#include "charlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "charlab/errors.hpp"

namespace charlab {

namespace {

constexpr double kTiny = 1e-300;

Vec ellipsoid_weights(const std::vector<double>& radii) {
  const int n = static_cast<int>(radii.size());
  Vec w(2 * n);
  for (int k = 0; k < n; ++k) {
    w(k) = 1.0 / (radii[k] * radii[k]);
    w(n + k) = w(k);
  }
  return w;
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InvalidArgument("ellipsoid needs at least one radius");
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      std::ostringstream os;
      os << "ellipsoid radius must be positive and finite, got " << r;
      throw InvalidArgument(os.str());
    }
  }
}

}  // namespace

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::ellipsoid: return "ellipsoid";
    case SurfaceKind::perturbed_ellipsoid: return "perturbed_ellipsoid";
    case SurfaceKind::custom: return "custom";
  }
  return "custom";
}

Hypersurface::Hypersurface(int dim_n, SurfaceKind kind, ScalarFn gauge, VecFn grad, MatFn hess,
                           std::vector<double> radii,
                           std::optional<QuarticPerturbation> perturbation)
    : dim_n_(dim_n),
      kind_(kind),
      gauge_(std::move(gauge)),
      grad_(std::move(grad)),
      hess_(std::move(hess)),
      radii_(std::move(radii)),
      perturbation_(std::move(perturbation)) {
  if (dim_n_ < 1) throw InvalidArgument("surface dimension n must be >= 1");
}

Hypersurface Hypersurface::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw InvalidArgument("scale factor must be positive");
  auto g = gauge_;
  auto dg = grad_;
  auto hg = hess_;
  std::vector<double> radii = radii_;
  for (double& r : radii) r *= lambda;
  return Hypersurface(
      dim_n_, kind_ == SurfaceKind::ellipsoid ? kind_ : SurfaceKind::custom,
      [g, lambda](const Vec& x) { return g(x) / lambda; },
      [dg, lambda](const Vec& x) -> Vec { return dg(x) / lambda; },
      [hg, lambda](const Vec& x) -> Mat { return hg(x) / lambda; },
      kind_ == SurfaceKind::ellipsoid ? radii : std::vector<double>{});
}

Hypersurface make_ellipsoid(const std::vector<double>& radii) {
  check_radii(radii);
  const int n = static_cast<int>(radii.size());
  const Vec w = ellipsoid_weights(radii);
  auto gauge = [w](const Vec& x) { return std::sqrt(x.dot(w.cwiseProduct(x))); };
  auto grad = [w](const Vec& x) -> Vec {
    const Vec wx = w.cwiseProduct(x);
    const double j = std::sqrt(x.dot(wx));
    if (j < kTiny) return Vec::Zero(x.size());
    return wx / j;
  };
  auto hess = [w](const Vec& x) -> Mat {
    const Vec wx = w.cwiseProduct(x);
    const double j = std::sqrt(x.dot(wx));
    if (j < kTiny) throw DomainError("gauge Hessian undefined at the origin");
    Mat h = Mat(w.asDiagonal()) / j;
    h.noalias() -= wx * wx.transpose() / (j * j * j);
    return h;
  };
  return Hypersurface(n, SurfaceKind::ellipsoid, gauge, grad, hess, radii);
}

Hypersurface make_perturbed_ellipsoid(const std::vector<double>& radii,
                                      const QuarticPerturbation& perturbation) {
  check_radii(radii);
  const int n = static_cast<int>(radii.size());
  if (perturbation.coeffs.size() != radii.size())
    throw InvalidArgument("quartic perturbation needs one coefficient per radius");
  const Vec w = ellipsoid_weights(radii);
  Vec cq = Vec::Zero(2 * n);
  for (int k = 0; k < n; ++k) cq(k) = perturbation.coeffs[k] * perturbation.magnitude;

  // Q4 = q^2 + sum cq_i x_i^4, j = Q4^{1/4}.
  struct Parts {
    double q4;
    Vec dq4;
    Mat d2q4;
  };
  auto parts = [w, cq](const Vec& x, bool with_hess) {
    const Vec wx = w.cwiseProduct(x);
    const double q = x.dot(wx);
    Parts p;
    p.q4 = q * q + (cq.array() * x.array().pow(4)).sum();
    p.dq4 = 4.0 * q * wx + 4.0 * cq.cwiseProduct(x.array().pow(3).matrix());
    if (with_hess) {
      p.d2q4 = 8.0 * wx * wx.transpose() + 4.0 * q * Mat(w.asDiagonal());
      p.d2q4.diagonal() += 12.0 * cq.cwiseProduct(x.cwiseProduct(x));
    }
    return p;
  };
  auto gauge = [parts](const Vec& x) { return std::pow(std::max(parts(x, false).q4, 0.0), 0.25); };
  auto grad = [parts](const Vec& x) -> Vec {
    const Parts p = parts(x, false);
    if (p.q4 < kTiny) return Vec::Zero(x.size());
    return 0.25 * std::pow(p.q4, -0.75) * p.dq4;
  };
  auto hess = [parts](const Vec& x) -> Mat {
    const Parts p = parts(x, true);
    if (p.q4 < kTiny) throw DomainError("gauge Hessian undefined at the origin");
    return 0.25 * std::pow(p.q4, -0.75) * p.d2q4 -
           (3.0 / 16.0) * std::pow(p.q4, -1.75) * p.dq4 * p.dq4.transpose();
  };
  Hypersurface s(n, SurfaceKind::perturbed_ellipsoid, gauge, grad, hess, radii, perturbation);
  const InvariantReport rep = sample_invariants(s, 400, 3);
  if (!rep.passed) throw InvalidArgument("perturbation too large: surface is not star-shaped");
  return s;
}

Hypersurface make_custom_surface(int dim_n, Hypersurface::ScalarFn gauge,
                                 Hypersurface::VecFn grad, Hypersurface::MatFn hess,
                                 std::uint64_t seed) {
  Hypersurface s(dim_n, SurfaceKind::custom, std::move(gauge), std::move(grad), std::move(hess));
  const InvariantReport rep = sample_invariants(s, 1000, seed);
  if (!rep.passed) {
    std::ostringstream os;
    os << "custom surface rejected: homogeneity error " << rep.max_homogeneity_error
       << ", Euler error " << rep.max_euler_error << ", star margin " << rep.min_star_margin
       << ", gradient check " << rep.max_grad_fd_error;
    throw InvalidArgument(os.str());
  }
  return s;
}

Vec project_to_surface(const Hypersurface& surface, const Vec& x) {
  const double j = surface.gauge(x);
  if (!(j > 0.0)) throw DomainError("cannot project the origin onto the surface");
  return x / j;
}

InvariantReport sample_invariants(const Hypersurface& surface, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> log_lambda(std::log(0.1), std::log(10.0));
  const int d = surface.ambient_dim();
  InvariantReport rep;
  rep.min_star_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = normal(rng);
    const double lambda = std::exp(log_lambda(rng));
    const double jx = surface.gauge(x);
    rep.max_homogeneity_error = std::max(
        rep.max_homogeneity_error, std::abs(surface.gauge(lambda * x) - lambda * jx) / (lambda * jx));
    rep.max_euler_error =
        std::max(rep.max_euler_error, std::abs(surface.gauge_grad(x).dot(x) - jx) / jx);
    const Vec y = x / jx;
    rep.min_star_margin = std::min(rep.min_star_margin, surface.gauge_grad(y).dot(y));
    if (s % 10 == 0) {
      const Vec g = surface.gauge_grad(y);
      const double h = 1e-6;
      for (int i = 0; i < d; ++i) {
        Vec p = y, m = y;
        p(i) += h;
        m(i) -= h;
        const double fd = (surface.gauge(p) - surface.gauge(m)) / (2 * h);
        rep.max_grad_fd_error = std::max(rep.max_grad_fd_error, std::abs(fd - g(i)));
      }
    }
  }
  rep.passed = rep.max_homogeneity_error <= 1e-10 && rep.max_euler_error <= 1e-8 &&
               rep.min_star_margin > 0.0 && rep.max_grad_fd_error <= 1e-5;
  return rep;
}

// ---------------------------------------------------------------------------
// AuxFunction

double AuxFunction::germ_ratio(double u) const {
  double r = 0.0;
  for (int k = 5; k >= 0; --k) r = r * u + germ_[k];
  return r;
}

double AuxFunction::germ_ratio_d(double u) const {
  double r = 0.0;
  for (int k = 5; k >= 1; --k) r = r * u + k * germ_[k];
  return r;
}

double AuxFunction::ratio(double t) const {
  t = std::abs(t);
  if (t <= t1_) return germ_ratio(t / t1_);
  if (t <= t2_) return c_ * alpha_ * std::pow(t, alpha_ - 2.0);
  return theta_inf_ + (theta_ - theta_inf_) * std::exp(-tail_lambda_ * (t - t2_));
}

double AuxFunction::d1(double t) const { return t * ratio(t); }

double AuxFunction::d2(double t) const {
  t = std::abs(t);
  if (t <= t1_) {
    const double u = t / t1_;
    return germ_ratio(u) + u * germ_ratio_d(u);
  }
  if (t <= t2_) return c_ * alpha_ * (alpha_ - 1.0) * std::pow(t, alpha_ - 2.0);
  const double b = (theta_ - theta_inf_) * std::exp(-tail_lambda_ * (t - t2_));
  return theta_inf_ + b - t * tail_lambda_ * b;
}

double AuxFunction::value(double t) const {
  t = std::abs(t);
  if (t <= t1_) {
    const double u = t / t1_;
    double s = 0.0;
    for (int k = 0; k <= 5; ++k) s += germ_[k] * std::pow(u, k + 2) / (k + 2);
    return t1_ * t1_ * s;
  }
  if (t <= t2_) return c_ * std::pow(t, alpha_);
  const double lam = tail_lambda_;
  const double b = theta_ - theta_inf_;
  const double e = std::exp(-lam * (t - t2_));
  return band_phi_t2_ + 0.5 * theta_inf_ * (t * t - t2_ * t2_) +
         b * ((t2_ / lam + 1.0 / (lam * lam)) - (t / lam + 1.0 / (lam * lam)) * e);
}

double AuxFunction::solve_ratio(double q) const {
  if (!(q > theta_inf_ && q < 1.0)) {
    std::ostringstream os;
    os << "ratio " << q << " outside the attainable range (" << theta_inf_ << ", 1)";
    throw InvalidArgument(os.str());
  }
  if (q >= theta_ && q <= 1.0 - theta_) return t1_ * std::pow(q / (1.0 - theta_), 1.0 / (alpha_ - 2.0));
  if (q < theta_) {
    const double s = -std::log((q - theta_inf_) / (theta_ - theta_inf_)) / tail_lambda_;
    return t2_ + s;
  }
  double lo = 0.0, hi = t1_;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) > q) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

AuxFunction make_aux_function(double theta, double alpha, double band_start) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0,1)");
  if (!(alpha > 1.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (1,2)");
  if (!(band_start > 0.0)) throw InvalidArgument("band start must be positive");
  if (!(theta < 0.5)) throw ConstructionFailure("theta >= 1/2 leaves an empty homogeneous band");
  if (!(alpha > 2.0 * (1.0 - theta))) {
    std::ostringstream os;
    os << "cannot join the quadratic germ to c t^alpha monotonically: need alpha > 2(1 - theta) = "
       << 2.0 * (1.0 - theta) << ", got alpha = " << alpha;
    throw ConstructionFailure(os.str());
  }
  AuxFunction f;
  f.theta_ = theta;
  f.alpha_ = alpha;
  f.t1_ = band_start;
  f.c_ = (1.0 - theta) * std::pow(band_start, 2.0 - alpha) / alpha;
  f.t2_ = band_start * std::pow((1.0 - theta) / theta, 1.0 / (2.0 - alpha));
  f.theta_inf_ = 0.5 * theta;
  f.tail_lambda_ = (2.0 - alpha) * theta / (f.t2_ * (theta - f.theta_inf_));
  f.band_phi_t2_ = f.c_ * std::pow(f.t2_, alpha);

  // Germ r(t1 u) = 1 + g2 u^2 + g3 u^3 + g4 u^4 + g5 u^5 with
  //   r(1) = 1 - theta, u r'(1) = (alpha - 2)(1 - theta), int_0^1 u r du = (1 - theta)/alpha.
  // g5 is free; pick the value with the largest monotonicity/convexity margin.
  Eigen::Matrix3d A;
  A << 1, 1, 1, 2, 3, 4, 1.0 / 4, 1.0 / 5, 1.0 / 6;
  const Eigen::Vector3d rhs0(-theta, (alpha - 2.0) * (1.0 - theta), (1.0 - theta) / alpha - 0.5);
  const Eigen::Vector3d col5(1.0, 5.0, 1.0 / 7.0);
  const auto lu = A.partialPivLu();
  double best_score = -std::numeric_limits<double>::infinity();
  double best[6] = {};
  for (int s = -4000; s <= 4000; ++s) {
    const double g5 = s * 0.005;
    const Eigen::Vector3d g = lu.solve(rhs0 - g5 * col5);
    f.germ_[0] = 1.0;
    f.germ_[1] = 0.0;
    f.germ_[2] = g(0);
    f.germ_[3] = g(1);
    f.germ_[4] = g(2);
    f.germ_[5] = g5;
    double score = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 400; ++i) {
      const double u = i / 400.0;
      score = std::min(score, -f.germ_ratio_d(u) / u);
      score = std::min(score, f.germ_ratio(u) + u * f.germ_ratio_d(u));
    }
    if (score > best_score) {
      best_score = score;
      std::copy(f.germ_, f.germ_ + 6, best);
    }
  }
  if (!(best_score > 0.0)) {
    std::ostringstream os;
    os << "no monotone C^2 germ found for theta = " << theta << ", alpha = " << alpha;
    throw ConstructionFailure(os.str());
  }
  std::copy(best, best + 6, f.germ_);

  // Dense log-grid verification of strict decrease of phi'(t)/t.
  double prev = f.ratio(1e-6 * band_start);
  const double t_hi = 8.0 * f.t2_;
  const int grid = 20000;
  for (int i = 1; i <= grid; ++i) {
    const double t = 1e-6 * band_start * std::pow(t_hi / (1e-6 * band_start), double(i) / grid);
    const double r = f.ratio(t);
    if (!(r < prev)) {
      std::ostringstream os;
      os << "phi'(t)/t fails to decrease near t = " << t;
      throw ConstructionFailure(os.str());
    }
    prev = r;
  }
  return f;
}

// ---------------------------------------------------------------------------

Hamiltonian homogeneous_hamiltonian(const Hypersurface& surface, double alpha) {
  Hamiltonian h;
  h.dim_n = surface.dim_n();
  h.value = [surface, alpha](const Vec& x) { return std::pow(surface.gauge(x), alpha); };
  h.grad = [surface, alpha](const Vec& x) -> Vec {
    const double j = surface.gauge(x);
    if (j < kTiny) return Vec::Zero(x.size());
    return alpha * std::pow(j, alpha - 1.0) * surface.gauge_grad(x);
  };
  h.hess = [surface, alpha](const Vec& x) -> Mat {
    const double j = surface.gauge(x);
    const Vec g = surface.gauge_grad(x);
    return alpha * std::pow(j, alpha - 1.0) * surface.gauge_hess(x) +
           alpha * (alpha - 1.0) * std::pow(j, alpha - 2.0) * g * g.transpose();
  };
  return h;
}

// ---------------------------------------------------------------------------
// HamiltonianSpec

namespace {

// Quintic smoothstep on [0,1] and its derivatives.
double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth_d(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smooth_dd(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }

}  // namespace

HamiltonianSpec::HamiltonianSpec(Hypersurface surface, double a, double period_T, AuxFunction aux,
                                 double K, const HamiltonianOptions& options)
    : surface_(std::move(surface)), a_(a), T_(period_T), aux_(aux), K_(K), options_(options) {
  if (!(a_ > 0.0)) throw InvalidArgument("parameter a must be positive");
  if (!(T_ > 0.0)) throw InvalidArgument("period T must be positive");
  eps_a_ = options.eps_a > 0.0 ? options.eps_a : M_PI / T_;
  if (!(eps_a_ * T_ < 2.0 * M_PI)) throw InvalidArgument("eps_a * T must be below 2 pi");
  A_ = options.cutoff_A > 0.0 ? options.cutoff_A : a_ * aux_.value(2.0 * aux_.band_end());
  if (!(options.blend_log_width > 0.0)) throw InvalidArgument("blend width must be positive");
  blend_width_ = options.blend_log_width;
  estimate_convexity(options.convexity_samples, options.seed);
}

HamiltonianSpec::HamiltonianSpec(const HamiltonianSpec& base, double K)
    : surface_(base.surface_),
      a_(base.a_),
      T_(base.T_),
      aux_(base.aux_),
      K_(K),
      eps_a_(base.eps_a_),
      A_(base.A_),
      blend_width_(base.blend_width_),
      convexity_eps_(base.convexity_eps_ + 2.0 * (K - base.K_)),
      options_(base.options_) {
  if (!(convexity_eps_ > 0.0))
    throw ConstructionFailure("H_{a,K} is not strictly convex for this K");
}

HamiltonianSpec HamiltonianSpec::with_K(double K) const { return HamiltonianSpec(*this, K); }

double HamiltonianSpec::H_tilde(const Vec& x) const { return a_ * aux_.value(surface_.gauge(x)); }

// The blend runs over log-levels: u = log(s / A) / W. A wide W keeps the
// second-order blend terms small compared with the quadratic mismatch q - s.
double HamiltonianSpec::blend_coordinate(double s) const {
  return std::log(s / A_) / blend_width_;
}

double HamiltonianSpec::H_a(const Vec& x) const {
  const double s = H_tilde(x);
  if (s <= A_) return s;
  const double q = 0.5 * eps_a_ * x.squaredNorm();
  const double u = blend_coordinate(s);
  if (u >= 1.0) return q;
  return s + smooth(u) * (q - s);
}

Vec HamiltonianSpec::H_a_grad(const Vec& x) const {
  const double j = surface_.gauge(x);
  if (j < kTiny) return Vec::Zero(x.size());
  const double s = a_ * aux_.value(j);
  const Vec gt = a_ * aux_.d1(j) * surface_.gauge_grad(x);
  if (s <= A_) return gt;
  const Vec gq = eps_a_ * x;
  const double u = blend_coordinate(s);
  if (u >= 1.0) return gq;
  const double q = 0.5 * eps_a_ * x.squaredNorm();
  const Vec du = gt / (blend_width_ * s);
  return gt + smooth(u) * (gq - gt) + (q - s) * smooth_d(u) * du;
}

Mat HamiltonianSpec::H_a_hess(const Vec& x) const {
  const int d = surface_.ambient_dim();
  const double j = surface_.gauge(x);
  if (j < 1e-12) {
    // phi(j) ~ j^2/2 near the origin; use the limit along e_1.
    Vec e = Vec::Zero(d);
    e(0) = 1e-6;
    const double je = surface_.gauge(e);
    const Vec g = surface_.gauge_grad(e);
    return a_ * (g * g.transpose() + je * surface_.gauge_hess(e));
  }
  const Vec dj = surface_.gauge_grad(x);
  const Mat ht = a_ * (aux_.d2(j) * dj * dj.transpose() + aux_.d1(j) * surface_.gauge_hess(x));
  const double s = a_ * aux_.value(j);
  if (s <= A_) return ht;
  const Mat hq = eps_a_ * Mat::Identity(d, d);
  const double u = blend_coordinate(s);
  if (u >= 1.0) return hq;
  const Vec gt = a_ * aux_.d1(j) * dj;
  const Vec gq = eps_a_ * x;
  const double q = 0.5 * eps_a_ * x.squaredNorm();
  const double b = smooth(u), db = smooth_d(u), ddb = smooth_dd(u);
  const double W = blend_width_;
  const Vec du = gt / (W * s);
  const Mat ddu = ht / (W * s) - gt * gt.transpose() / (W * s * s);
  const Vec diff = gq - gt;
  return ht + b * (hq - ht) + db * (diff * du.transpose() + du * diff.transpose()) +
         (q - s) * (ddb * du * du.transpose() + db * ddu);
}

double HamiltonianSpec::H_aK(const Vec& x) const { return H_a(x) + 0.5 * K_ * x.squaredNorm(); }
Vec HamiltonianSpec::H_aK_grad(const Vec& x) const { return H_a_grad(x) + K_ * x; }
Mat HamiltonianSpec::H_aK_hess(const Vec& x) const {
  Mat h = H_a_hess(x);
  h.diagonal().array() += K_;
  return h;
}

Hamiltonian HamiltonianSpec::hamiltonian_a() const {
  Hamiltonian h;
  h.dim_n = surface_.dim_n();
  const HamiltonianSpec self = *this;
  h.value = [self](const Vec& x) { return self.H_a(x); };
  h.grad = [self](const Vec& x) { return self.H_a_grad(x); };
  h.hess = [self](const Vec& x) { return self.H_a_hess(x); };
  return h;
}

Hamiltonian HamiltonianSpec::hamiltonian_aK() const {
  Hamiltonian h;
  h.dim_n = surface_.dim_n();
  const HamiltonianSpec self = *this;
  h.value = [self](const Vec& x) { return self.H_aK(x); };
  h.grad = [self](const Vec& x) { return self.H_aK_grad(x); };
  h.hess = [self](const Vec& x) { return self.H_aK_hess(x); };
  return h;
}

void HamiltonianSpec::estimate_convexity(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = surface_.ambient_dim();
  // Probe j-levels log-uniformly from near the origin to past the outer blend.
  double j_end = aux_.band_end();
  while (a_ * aux_.value(j_end) < A_ * std::exp(blend_width_)) j_end *= 1.5;
  j_end *= 1.5;
  const double j_lo = 1e-3 * aux_.band_start();
  auto random_point = [&]() {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir(i) = normal(rng);
    const double jt = j_lo * std::pow(j_end / j_lo, unit(rng));
    return Vec(dir * (jt / surface_.gauge(dir)));
  };
  double min_q = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_point();
    Vec y;
    if (s % 2 == 0) {
      y = random_point();
    } else {
      Vec dx(d);
      for (int i = 0; i < d; ++i) dx(i) = normal(rng);
      y = x + dx * (1e-2 * x.norm() / dx.norm());
    }
    const Vec diff = x - y;
    const double q = (H_aK_grad(x) - H_aK_grad(y)).dot(diff) / diff.squaredNorm();
    min_q = std::min(min_q, q);
    if (s % 20 == 0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(H_aK_hess(x), Eigen::EigenvaluesOnly);
      min_q = std::min(min_q, es.eigenvalues()(0));
    }
  }
  convexity_eps_ = 2.0 * min_q;
  if (!(convexity_eps_ > 0.0)) {
    std::ostringstream os;
    os << "H_{a,K} is not strictly convex for K = " << K_ << " (sampled modulus " << min_q
       << "); increase K";
    throw ConstructionFailure(os.str());
  }
}

double HamiltonianSpec::rho_for_period(double tau) const {
  if (!(tau > 0.0)) throw InvalidArgument("period must be positive");
  return aux_.solve_ratio(tau / (a_ * T_));
}

double HamiltonianSpec::critical_value_for_period(double tau) const {
  const double rho = rho_for_period(tau);
  return 0.5 * a_ * aux_.d1(rho) * rho * T_ - a_ * aux_.value(rho) * T_;
}

FenchelResult HamiltonianSpec::fenchel_dual(const Vec& y, const Vec* warm_start) const {
  const int d = surface_.ambient_dim();
  Vec x;
  if (warm_start && warm_start->size() == d) {
    x = *warm_start;
  } else {
    x = y / (a_ + K_ + eps_a_);
  }
  const double scale = std::max(1.0, y.norm());
  auto objective = [&](const Vec& z) { return H_aK(z) - z.dot(y); };
  Vec g = H_aK_grad(x) - y;
  double f = objective(x);
  int it = 0;
  for (; it < 200; ++it) {
    if (g.norm() <= 1e-12 * scale) break;
    const Mat h = H_aK_hess(x);
    Eigen::LLT<Mat> llt(h);
    Vec step = llt.info() == Eigen::Success ? Vec(-llt.solve(g)) : Vec(-g / (K_ + eps_a_));
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec xn = x + t * step;
      const Vec gn = H_aK_grad(xn) - y;
      const double fn = objective(xn);
      if (gn.norm() < (1.0 - 1e-4 * t) * g.norm() || fn <= f + 1e-4 * t * g.dot(step)) {
        x = xn;
        g = gn;
        f = fn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(g.norm() <= 1e-10 * scale)) {
    std::ostringstream os;
    os << "Fenchel dual Newton solve did not converge (residual " << g.norm() << ")";
    throw NumericFailure(os.str(), g.norm());
  }
  FenchelResult r;
  r.grad = x;
  r.value = x.dot(y) - H_aK(x);
  r.hess = H_aK_hess(x).inverse();
  r.iterations = it;
  return r;
}

}  // namespace charlab
