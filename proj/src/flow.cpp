#include "charlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "charlab/errors.hpp"

namespace charlab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

void check_region(const Vec& x, const FlowOptions& options, double t) {
  const double r = x.norm();
  if (!(r >= options.min_radius)) {
    std::ostringstream os;
    os << "trajectory entered the excluded ball around the origin at t = " << t;
    throw DomainError(os.str());
  }
  if (!(r <= options.max_radius)) {
    std::ostringstream os;
    os << "trajectory left the modeled region at t = " << t;
    throw DomainError(os.str());
  }
}

std::vector<double> uniform_times(double t_end, int samples) {
  std::vector<double> t(samples + 1);
  for (int i = 0; i <= samples; ++i) t[i] = t_end * i / samples;
  t.back() = t_end;
  return t;
}

template <class System, class Observer>
void run_controlled(System sys, State& s, const std::vector<double>& times, double tol,
                    Observer obs) {
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = (times.size() > 1 ? times[1] - times[0] : 1.0) * 0.1;
  try {
    odeint::integrate_times(stepper, sys, s, times.begin(), times.end(), dt0, obs,
                            odeint::max_step_checker(200000));
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericFailure(std::string("step-size control failed: ") + e.what());
  }
}

}  // namespace

Trajectory integrate_flow(const Hamiltonian& h, const Vec& x0, double t_end,
                          const FlowOptions& options) {
  if (!(x0.norm() > 0.0)) throw InvalidArgument("initial point must be nonzero");
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be non-negative");
  Trajectory traj;
  traj.period_tau = t_end;
  traj.energy_level = h.value(x0);
  if (t_end == 0.0) {
    traj.times = {0.0};
    traj.states = {x0};
    return traj;
  }
  check_region(x0, options, 0.0);
  const int d = static_cast<int>(x0.size());
  auto sys = [&](const State& s, State& ds, double t) {
    Eigen::Map<const Vec> x(s.data(), d);
    check_region(x, options, t);
    const Vec v = apply_J(h.grad(x));
    std::copy(v.data(), v.data() + d, ds.begin());
  };
  State s(x0.data(), x0.data() + d);
  traj.times.reserve(options.samples + 1);
  traj.states.reserve(options.samples + 1);
  run_controlled(sys, s, uniform_times(t_end, options.samples), options.tol,
                 [&](const State& st, double t) {
                   traj.times.push_back(t);
                   traj.states.emplace_back(Eigen::Map<const Vec>(st.data(), d));
                 });
  for (const Vec& x : traj.states)
    traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(h.value(x) - traj.energy_level));
  traj.closure_residual = (traj.states.back() - traj.states.front()).norm();
  return traj;
}

Mat project_symplectic(const Mat& M, int max_iter) {
  const Mat J = standard_J(static_cast<int>(M.rows() / 2));
  Mat R = M;
  for (int it = 0; it < max_iter; ++it) {
    const Mat E = R.transpose() * J * R - J;
    if (E.cwiseAbs().maxCoeff() < 1e-15) break;
    R = R * (Mat::Identity(R.rows(), R.cols()) + 0.5 * J * E);
  }
  return R;
}

SymplecticPath integrate_linearized(const Trajectory& traj, const Hamiltonian& h,
                                    const FlowOptions& options) {
  if (traj.states.empty()) throw InvalidArgument("empty trajectory");
  const int d = traj.dim();
  SymplecticPath path;
  if (traj.times.size() < 2) {
    path.times = {0.0};
    path.samples = {Mat::Identity(d, d)};
    path.end_monodromy = Mat::Identity(d, d);
    return path;
  }
  auto sys = [&](const State& s, State& ds, double t) {
    Eigen::Map<const Vec> x(s.data(), d);
    Eigen::Map<const Mat> R(s.data() + d, d, d);
    check_region(x, options, t);
    const Vec v = apply_J(h.grad(x));
    const Mat JS = standard_J(d / 2) * h.hess(x);
    const Mat dR = JS * R;
    std::copy(v.data(), v.data() + d, ds.begin());
    std::copy(dR.data(), dR.data() + d * d, ds.begin() + d);
  };
  State s(d + d * d, 0.0);
  std::copy(traj.states.front().data(), traj.states.front().data() + d, s.begin());
  for (int i = 0; i < d; ++i) s[d + i * d + i] = 1.0;
  path.times.reserve(traj.times.size());
  path.samples.reserve(traj.times.size());
  run_controlled(sys, s, traj.times, options.tol, [&](const State& st, double t) {
    path.times.push_back(t);
    path.samples.emplace_back(Eigen::Map<const Mat>(st.data() + d, d, d));
  });
  path.samples.front() = Mat::Identity(d, d);
  for (Mat& R : path.samples) {
    double defect = symplectic_defect(R);
    if (defect > 1e-10) {
      R = project_symplectic(R);
      ++path.projections;
      defect = symplectic_defect(R);
    }
    path.max_defect = std::max(path.max_defect, defect);
    path.max_det_error = std::max(path.max_det_error, std::abs(R.determinant() - 1.0));
  }
  if (path.max_defect > 1e-6) {
    std::ostringstream os;
    os << "symplecticity defect " << path.max_defect << " exceeds 1e-6; refine the step";
    throw NumericFailure(os.str(), path.max_defect);
  }
  path.end_monodromy = path.samples.back();
  return path;
}

std::vector<FloquetMultiplier> floquet_multipliers(const Mat& monodromy,
                                                   const FloquetOptions& options) {
  Eigen::EigenSolver<Mat> es(monodromy, false);
  if (es.info() != Eigen::Success) throw NumericFailure("eigen-solver failure on monodromy");
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
    return std::arg(a) != std::arg(b) ? std::arg(a) < std::arg(b) : std::abs(a) < std::abs(b);
  });
  std::vector<FloquetMultiplier> out;
  std::vector<bool> used(ev.size(), false);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    FloquetMultiplier m;
    std::complex<double> sum = ev[i];
    used[i] = true;
    for (std::size_t k = i + 1; k < ev.size(); ++k) {
      if (!used[k] && std::abs(ev[k] - ev[i]) <= options.cluster_tol * std::max(1.0, std::abs(ev[i]))) {
        used[k] = true;
        sum += ev[k];
        ++m.multiplicity;
      }
    }
    m.value = sum / double(m.multiplicity);
    m.on_unit_circle = std::abs(std::abs(m.value) - 1.0) <= options.circle_tol;
    double ang = std::arg(m.value);
    if (ang < 0) ang += 2.0 * M_PI;
    if (ang >= 2.0 * M_PI) ang -= 2.0 * M_PI;
    m.angle = ang;
    out.push_back(m);
  }
  // lambda and 1/conj(lambda) carry equal multiplicity.
  for (const auto& m : out) {
    const std::complex<double> partner = 1.0 / std::conj(m.value);
    int mult = 0;
    for (const auto& o : out)
      if (std::abs(o.value - partner) <= 10 * options.cluster_tol * std::max(1.0, std::abs(partner)))
        mult += o.multiplicity;
    if (mult != m.multiplicity && !(m.on_unit_circle && mult >= 1)) {
      std::ostringstream os;
      os << "Floquet spectrum violates symplectic pairing at " << m.value;
      throw NumericFailure(os.str());
    }
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw InvalidArgument("cannot open " + file);
  out << "t";
  for (int i = 1; i <= traj.dim(); ++i) out << ",x_" << i;
  out << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << traj.times[k];
    for (int i = 0; i < traj.dim(); ++i) out << "," << traj.states[k][i];
    out << "\n";
  }
}

void write_path_csv(const SymplecticPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw InvalidArgument("cannot open " + file);
  const int d = static_cast<int>(path.end_monodromy.rows());
  out << "t";
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) out << ",R_" << i << "_" << j;
  out << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < path.samples.size(); ++k) {
    out << path.times[k];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out << "," << path.samples[k](i, j);
    out << "\n";
  }
}

}  // namespace charlab
