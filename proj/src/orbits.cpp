#include "charlab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "charlab/errors.hpp"
#include "charlab/index.hpp"

namespace charlab {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::shooting: return "shooting";
    case Provenance::galerkin: return "galerkin";
  }
  return "unknown";
}

double surface_residual(const Hypersurface& surface, const Trajectory& traj) {
  double r = 0.0;
  for (const Vec& x : traj.states) r = std::max(r, std::abs(surface.gauge(x) - 1.0));
  return r;
}

CatalogResult ellipsoid_catalog(const std::vector<double>& radii, int samples) {
  const Hypersurface surface = make_ellipsoid(radii);  // validates radii
  const int n = static_cast<int>(radii.size());
  CatalogResult out;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double q = radii[j] * radii[j] / (radii[k] * radii[k]);
      if (auto r = recognize_rational(q, 64, 1e-12)) {
        std::ostringstream os;
        os << "radii " << j + 1 << " and " << k + 1 << " are rationally dependent (r_" << j + 1
           << "^2 / r_" << k + 1 << "^2 = " << r->num << "/" << r->den
           << "): extra orbit families exist, catalog incomplete";
        out.warnings.push_back(os.str());
      }
    }
  for (int k = 0; k < n; ++k) {
    const double r = radii[k], w = 2.0 / (r * r), tau = M_PI * r * r;
    ClosedCharacteristic c;
    c.id = "ellipsoid-" + std::to_string(k + 1);
    c.prime_period = tau;
    c.provenance = Provenance::analytic;
    Trajectory& tr = c.trajectory;
    tr.period_tau = tau;
    tr.energy_level = 1.0;
    for (int i = 0; i <= samples; ++i) {
      const double t = tau * i / samples;
      Vec x = Vec::Zero(2 * n);
      x[k] = r * std::cos(w * t);
      x[n + k] = r * std::sin(w * t);
      tr.times.push_back(t);
      tr.states.push_back(x);
    }
    tr.closure_residual = (tr.states.back() - tr.states.front()).norm();
    for (const Vec& x : tr.states)
      tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(std::pow(surface.gauge(x), 2) - 1.0));
    out.orbits.push_back(std::move(c));
  }
  return out;
}

ClosedCharacteristic shoot_for_orbit(const Hypersurface& surface, const Vec& seed,
                                     double period_guess, const ShootingOptions& options) {
  const int d = surface.ambient_dim();
  if (seed.size() != d) throw InvalidArgument("seed has the wrong dimension");
  if (!(period_guess > 0.0)) throw InvalidArgument("period guess must be positive");
  const Hamiltonian h = homogeneous_hamiltonian(surface, 2.0);
  Vec v = apply_J(h.grad(seed));
  v /= v.norm();

  FlowOptions fo;
  fo.samples = 64;
  Vec x = seed;
  double tau = period_guess;
  auto residual = [&](const Vec& x0, double t, Mat* jac) {
    const Trajectory tr = integrate_flow(h, x0, t, fo);
    Vec r(d + 2);
    r.head(d) = tr.states.back() - x0;
    r[d] = surface.gauge(x0) - 1.0;
    r[d + 1] = (x0 - seed).dot(v);
    if (jac) {
      const SymplecticPath p = integrate_linearized(tr, h, fo);
      jac->setZero(d + 2, d + 1);
      jac->topLeftCorner(d, d) = p.end_monodromy - Mat::Identity(d, d);
      jac->block(0, d, d, 1) = apply_J(h.grad(tr.states.back()));
      jac->block(d, 0, 1, d) = surface.gauge_grad(x0).transpose();
      jac->block(d + 1, 0, 1, d) = v.transpose();
    }
    return r;
  };

  int it = 0;
  bool converged = false;
  try {
    Mat jac;
    Vec r = residual(x, tau, &jac);
    for (; it < options.max_iter; ++it) {
      if (r.head(d).norm() <= options.tol && std::abs(r[d]) <= options.tol) {
        converged = true;
        break;
      }
      const Vec step = jac.completeOrthogonalDecomposition().solve(-r);
      double lambda = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
        const Vec xn = x + lambda * step.head(d);
        const double tn = tau + lambda * step[d];
        if (!(tn > 0.0)) continue;
        const Vec rn = residual(xn, tn, nullptr);
        if (rn.norm() < r.norm() || rn.norm() <= options.tol) {
          x = xn;
          tau = tn;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      if (tau > options.max_period_ratio * period_guess || tau < period_guess / options.max_period_ratio)
        break;
      r = residual(x, tau, &jac);
    }
  } catch (const DomainError& e) {
    throw SearchFailure(std::string("shooting left the modeled region: ") + e.what());
  } catch (const NumericFailure& e) {
    throw SearchFailure(std::string("shooting failed: ") + e.what());
  }
  if (!converged) {
    std::ostringstream os;
    os << "shooting did not converge after " << it << " iterations (tau = " << tau << ")";
    throw SearchFailure(os.str());
  }

  ClosedCharacteristic c;
  c.provenance = Provenance::shooting;
  c.prime_period = tau;
  c.search_iterations = it;
  FlowOptions out;
  out.samples = options.samples;
  c.trajectory = integrate_flow(h, x, tau, out);
  const int m = detect_iteration(surface, c);
  if (m > 1) {
    c.prime_period = tau / m;
    c.trajectory = integrate_flow(h, x, c.prime_period, out);
  }
  return c;
}

int detect_iteration(const Hypersurface& surface, const ClosedCharacteristic& orbit, int max_m,
                     double tol) {
  const Hamiltonian h = homogeneous_hamiltonian(surface, 2.0);
  const Vec& x0 = orbit.start();
  FlowOptions fo;
  fo.samples = 16;
  for (int m = max_m; m >= 2; --m) {
    const Trajectory tr = integrate_flow(h, x0, orbit.prime_period / m, fo);
    if (tr.closure_residual <= tol * std::max(1.0, x0.norm())) return m;
  }
  return 1;
}

namespace {

double point_to_polyline(const Vec& p, const std::vector<Vec>& poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t N = poly.size();
  for (std::size_t i = 0; i < N; ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % N];
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    double s = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    best = std::min(best, (a + s * ab - p).norm());
  }
  return best;
}

}  // namespace

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("empty curve");
  double h = 0.0;
  for (const Vec& p : a) h = std::max(h, point_to_polyline(p, b));
  for (const Vec& p : b) h = std::max(h, point_to_polyline(p, a));
  return h;
}

OrbitRegistry::AddResult OrbitRegistry::add(ClosedCharacteristic orbit) {
  AddResult res;
  for (auto& e : orbits_) {
    if (hausdorff_distance(orbit.trajectory.states, e.trajectory.states) > separation_) continue;
    const double ratio = orbit.prime_period / e.prime_period;
    const double m = std::round(ratio);
    res.id = e.id;
    if (m >= 1 && std::abs(ratio - m) <= 1e-6 * m) {
      res.kind = m == 1 ? AddResult::duplicate : AddResult::folded_iterate;
      res.iterate = static_cast<int>(m);
      return res;
    }
    const double inv = std::round(1.0 / ratio);
    if (inv >= 2 && std::abs(1.0 / ratio - inv) <= 1e-6 * inv) {
      // the stored record was an iterate; keep the prime one under the old id
      orbit.id = e.id;
      e = std::move(orbit);
      res.kind = AddResult::added;
      return res;
    }
  }
  if (orbit.id.empty()) orbit.id = "orbit-" + std::to_string(orbits_.size() + 1);
  for (const auto& e : orbits_)
    if (e.id == orbit.id) orbit.id += "-" + std::to_string(orbits_.size() + 1);
  res.id = orbit.id;
  orbits_.push_back(std::move(orbit));
  return res;
}

ClosedCharacteristic* OrbitRegistry::find(const std::string& id) {
  for (auto& e : orbits_)
    if (e.id == id) return &e;
  return nullptr;
}

double recheck_closure(const Hypersurface& surface, const ClosedCharacteristic& orbit) {
  FlowOptions fo;
  fo.tol = 1e-13;
  fo.samples = 16;
  return integrate_flow(homogeneous_hamiltonian(surface, 2.0), orbit.start(), orbit.prime_period, fo)
      .closure_residual;
}

Trajectory homogeneous_trajectory(const Hypersurface& surface, const ClosedCharacteristic& orbit,
                                  double alpha, int samples) {
  FlowOptions fo;
  fo.samples = samples;
  return integrate_flow(homogeneous_hamiltonian(surface, alpha), orbit.start(),
                        2.0 * orbit.prime_period / alpha, fo);
}

}  // namespace charlab
