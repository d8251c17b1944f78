#include "charlab/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "charlab/errors.hpp"

namespace charlab {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Mat orthonormal_frame(const Mat& Z) {
  Eigen::HouseholderQR<Mat> qr(Z);
  return qr.householderQ() * Mat::Identity(Z.rows(), Z.cols());
}

// half-count of a snapped endpoint angle in [0, 2 pi)
double kappa(double theta) { return theta == 0.0 ? 0.0 : 0.5; }

}  // namespace

IterateIndexer::IterateIndexer(const SymplecticPath& path, std::complex<double> omega,
                               const IndexOptions& options)
    : path_(&path), omega_(omega), options_(options), n_(path.dim_n()) {
  if (path.samples.size() < 2) throw InvalidArgument("symplectic path needs at least two samples");
  if (std::abs(std::abs(omega) - 1.0) > 1e-12) throw InvalidArgument("omega must lie on the unit circle");
  const int d = 2 * n_;
  Mat Omega = Mat::Zero(2 * d, 2 * d);
  Omega.topLeftCorner(d, d) = -standard_J(n_);
  Omega.bottomRightCorner(d, d) = standard_J(n_);
  const CMat herm = std::complex<double>(0.0, -1.0) * Omega.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  // Orientation chosen so that a positive-definite crossing form turns the
  // endpoint eigen-angles counter-clockwise.
  P_plus_ = es.eigenvectors().leftCols(d);
  P_minus_ = es.eigenvectors().rightCols(d);

  CMat lam(2 * d, d);
  lam.topRows(d) = CMat::Identity(d, d);
  lam.bottomRows(d) = omega_ * CMat::Identity(d, d);
  const CMat A = P_plus_.adjoint() * lam, B = P_minus_.adjoint() * lam;
  U_omega_ = B * A.inverse();

  Mat g(2 * d, d);
  g.topRows(d) = Mat::Identity(d, d);
  g.bottomRows(d) = Mat::Identity(d, d);
  frames_.push_back(orthonormal_frame(g).cast<std::complex<double>>());
  prefix_.push_back(0.0);
}

void IterateIndexer::extend_to(int m) {
  const int d = 2 * n_;
  const auto& samples = path_->samples;
  const auto& times = path_->times;
  while (static_cast<int>(seg_winding_.size()) < m) {
    const int j = static_cast<int>(seg_winding_.size());
    const Mat F = frames_[j].real();
    double wind = 0.0;
    std::complex<double> prev;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      Mat Z(2 * d, d);
      Z.topRows(d) = F.topRows(d);
      Z.bottomRows(d) = samples[k] * F.bottomRows(d);
      const CMat Zc = Z.cast<std::complex<double>>();
      const std::complex<double> r =
          (P_minus_.adjoint() * Zc).determinant() / (P_plus_.adjoint() * Zc).determinant();
      if (k > 0) {
        const double step = std::arg(r / prev);
        if (std::abs(step) > options_.max_increment) {
          std::ostringstream os;
          os << "winding step " << step << " rad exceeds the sampling tolerance in segment " << j
             << " on [" << times[k - 1] << ", " << times[k] << "]; refine the path";
          throw NumericFailure(os.str(), std::abs(step));
        }
        wind += step;
      }
      prev = r;
    }
    seg_winding_.push_back(wind);
    prefix_.push_back(prefix_.back() + wind);
    Mat next(2 * d, d);
    next.topRows(d) = F.topRows(d);
    next.bottomRows(d) = path_->end_monodromy * F.bottomRows(d);
    frames_.push_back(orthonormal_frame(next).cast<std::complex<double>>());
  }
}

std::vector<double> IterateIndexer::endpoint_angles(const CMat& frame) const {
  const CMat A = P_plus_.adjoint() * frame, B = P_minus_.adjoint() * frame;
  const CMat W = U_omega_.adjoint() * (B * A.inverse());
  Eigen::ComplexEigenSolver<CMat> es(W, false);
  std::vector<double> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double a = std::arg(es.eigenvalues()(i));
    if (a < 0) a += kTwoPi;
    if (a < options_.snap_tol || kTwoPi - a < options_.snap_tol) a = 0.0;
    out.push_back(a);
  }
  return out;
}

double IterateIndexer::winding(int m) {
  extend_to(m);
  return prefix_[m];
}

OmegaIndex IterateIndexer::index(int m) {
  if (m < 1) throw InvalidArgument("iterate m must be >= 1");
  extend_to(m);
  const auto th0 = endpoint_angles(frames_[0]);
  const auto th1 = endpoint_angles(frames_[m]);
  double s0 = 0, s1 = 0, k0 = 0, k1 = 0;
  int nu = 0;
  for (double a : th0) s0 += a, k0 += kappa(a);
  for (double a : th1) {
    s1 += a;
    k1 += kappa(a);
    if (a == 0.0) ++nu;
  }
  const double lifts = (prefix_[m] - s1 + s0) / kTwoPi;
  const double rounded = std::round(lifts);
  if (std::abs(lifts - rounded) > 1e-3) {
    std::ostringstream os;
    os << "winding and endpoint spectrum disagree (lift defect " << lifts - rounded
       << ") for iterate " << m;
    throw NumericFailure(os.str(), std::abs(lifts - rounded));
  }
  const double mu = rounded + k1 - k0;
  OmegaIndex r;
  r.index = static_cast<int>(std::lround(mu - 0.5 * nu));
  r.nullity = nu;
  return r;
}

MaslovResult maslov_index(const SymplecticPath& path, int m, const IndexOptions& options) {
  if (path.max_defect > 1e-8) {
    std::ostringstream os;
    os << "symplecticity defect " << path.max_defect << " exceeds 1e-8";
    throw NumericFailure(os.str(), path.max_defect);
  }
  IterateIndexer ix(path, 1.0, options);
  const OmegaIndex r = ix.index(m);
  MaslovResult out;
  out.raw_index = r.index;
  out.index_i = r.index - path.dim_n();
  out.nullity = r.nullity;
  return out;
}

OmegaIndex bott_iterate_index(const SymplecticPath& path, int m, const IndexOptions& options) {
  if (m < 1) throw InvalidArgument("iterate m must be >= 1");
  OmegaIndex total;
  for (int k = 0; k < m; ++k) {
    const std::complex<double> w = std::polar(1.0, kTwoPi * k / m);
    const OmegaIndex r = omega_index(path, w, options);
    total.index += r.index;
    total.nullity += r.nullity;
  }
  return total;
}

// ---------------------------------------------------------------------------

double rotation_mean_index(const SymplecticPath& path, const IndexOptions& options) {
  std::vector<double> cuts = {0.0, kTwoPi};
  for (const auto& fm : floquet_multipliers(path))
    if (fm.on_unit_circle) cuts.push_back(fm.angle);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> merged;
  for (double c : cuts)
    if (merged.empty() || c - merged.back() > 1e-4) merged.push_back(c);
  if (kTwoPi - merged.back() <= 1e-4) merged.back() = kTwoPi;
  else merged.push_back(kTwoPi);

  // All omega share the segment winding; only the endpoint spectra differ.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double lo = merged[i], hi = merged[i + 1];
    const std::complex<double> w = std::polar(1.0, 0.5 * (lo + hi));
    total += omega_index(path, w, options).index * (hi - lo);
  }
  return total / kTwoPi;
}

std::optional<RationalValue> recognize_rational(double x, int q_max, double tol) {
  // continued-fraction convergents h/k
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = x;
  std::optional<RationalValue> best;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(rest);
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > q_max) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    if (std::abs(x - double(h1) / double(k1)) <= tol) {
      best = RationalValue{h1, k1};
      break;
    }
    const double frac = rest - a;
    if (frac < 1e-15) break;
    rest = 1.0 / frac;
  }
  return best;
}

MeanIndexResult mean_index(const std::vector<IndexRecord>& records, int dim_n, double rotation,
                           int q_max, double rational_tol) {
  const int M = static_cast<int>(records.size());
  if (M < 2 * dim_n + 2) {
    std::ostringstream os;
    os << "mean index needs at least 2n + 2 = " << 2 * dim_n + 2 << " iterates, got " << M;
    throw InvalidArgument(os.str());
  }
  MeanIndexResult r;
  r.rotation = rotation;
  const double two_n = 2.0 * dim_n;
  double smi = 0, smm = 0;
  r.lower = -std::numeric_limits<double>::infinity();
  r.upper = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    const double m = rec.iterate_m;
    smi += m * rec.index_i;
    smm += m * m;
    r.lower = std::max(r.lower, (rec.index_i - two_n) / m);
    r.upper = std::min(r.upper, (rec.index_i + two_n) / m);
  }
  // Fit through the origin: with |e_m| <= 2n the slope error stays below 3n / M.
  r.slope = smi / smm;
  r.error_bar = 2.0 * two_n / M;
  const double grid = 1e-6;
  if (!(rotation >= r.lower - grid && rotation <= r.upper + grid) ||
      std::abs(r.slope - rotation) > r.error_bar + grid) {
    std::ostringstream os;
    os << "mean index estimates disagree: rotation " << rotation << ", slope " << r.slope
       << " +- " << r.error_bar << ", feasible [" << r.lower << ", " << r.upper << "]";
    throw NumericFailure(os.str(), std::abs(r.slope - rotation));
  }
  r.value = rotation;
  r.rational = recognize_rational(rotation, q_max, rational_tol);
  if (r.rational) r.value = double(r.rational->num) / double(r.rational->den);
  r.method = "both";
  return r;
}

int minimal_period_K(const std::vector<FloquetMultiplier>& multipliers, double angle_tol, int q_max) {
  long long L = 1;
  for (const auto& fm : multipliers) {
    if (!fm.on_unit_circle) continue;
    const double x = fm.angle / kTwoPi;
    std::set<std::pair<long long, long long>> hits;
    for (int q = 1; q <= q_max; ++q) {
      const long long p = std::llround(x * q);
      if (std::abs(fm.angle - kTwoPi * double(p) / q) <= angle_tol) {
        const long long g = std::gcd(p, static_cast<long long>(q));
        hits.insert({p / g, q / g});
      }
    }
    if (hits.size() > 1) {
      std::ostringstream os;
      os << "angle " << fm.angle << " matches several rationals:";
      for (const auto& [p, q] : hits) os << " 2pi*" << p << "/" << q;
      throw AmbiguityFailure(os.str());
    }
    if (hits.size() == 1) L = std::lcm(L, hits.begin()->second);
  }
  return static_cast<int>(2 * L);
}

int d_of_K(double K, double T, int dim_n) {
  const double x = K * T / kTwoPi;
  if (std::abs(K * T - kTwoPi * std::round(x)) < 1e-6) {
    std::ostringstream os;
    os << "K T = " << K * T << " lies within 1e-6 of 2 pi Z";
    throw InvalidArgument(os.str());
  }
  return 2 * dim_n * (static_cast<int>(std::floor(x)) + 1);
}

KShiftCheck k_shift_audit(const std::vector<GalerkinIndexSample>& samples, double T, int dim_n,
                          int path_index, int path_nullity) {
  KShiftCheck c;
  c.path_index = path_index;
  c.consistent = true;
  std::ostringstream bad;
  for (const auto& s : samples) {
    const int d = d_of_K(s.K, T, dim_n);
    c.K_values.push_back(s.K);
    c.d_of_K.push_back(d);
    c.morse_index.push_back(s.morse_index);
    c.shifted.push_back(s.morse_index - d);
    c.nullity.push_back(s.nullity);
    if (s.morse_index - d != path_index || s.nullity != path_nullity) {
      c.consistent = false;
      bad << " K=" << s.K << ": i_K - d(K) = " << s.morse_index - d << ", nullity " << s.nullity
          << ";";
    }
  }
  if (!c.consistent) {
    std::ostringstream os;
    os << "Galerkin Morse data disagree with the path index " << path_index << " (nullity "
       << path_nullity << "):" << bad.str();
    throw ConsistencyFailure(os.str());
  }
  return c;
}

void check_index_records(const std::vector<IndexRecord>& records, int dim_n, double mean,
                         int K_of_y) {
  std::ostringstream bad;
  for (const auto& r : records) {
    if (r.nullity_nu < 1 || r.nullity_nu > 2 * dim_n - 1)
      bad << " nu(y^" << r.iterate_m << ") = " << r.nullity_nu << " outside [1, 2n-1];";
    if (std::abs(r.index_i - r.iterate_m * mean) > 2 * dim_n + 1e-9)
      bad << " |i(y^" << r.iterate_m << ") - m i^| = " << std::abs(r.index_i - r.iterate_m * mean)
          << " > 2n;";
    for (const auto& s : records) {
      if (s.iterate_m != r.iterate_m + K_of_y) continue;
      if ((s.index_i - r.index_i) % 2 != 0)
        bad << " i(y^" << s.iterate_m << ") - i(y^" << r.iterate_m << ") is odd;";
      if (s.nullity_nu != r.nullity_nu)
        bad << " nu(y^" << s.iterate_m << ") != nu(y^" << r.iterate_m << ");";
    }
  }
  if (!bad.str().empty()) throw ConsistencyFailure("index record invariants violated:" + bad.str());
}

}  // namespace charlab
