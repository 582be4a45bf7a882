#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "circlemap/enclosure.hpp"
#include "circlemap/map.hpp"

namespace circlemap {

namespace detail {

inline long long floor_div(long long n, long long d) {
  long long q = n / d, r = n % d;
  return (r != 0 && ((r < 0) != (d < 0))) ? q - 1 : q;
}

inline long long ceil_div(long long n, long long d) { return -floor_div(-n, d); }

// geometric tail of the coefficient bound (j+2) a^j, already scaled by (1-a)^2:
// (1-a)^2 sum_{j>J} a^j (j+2) = a^{J+1} (J+3-(J+2)a)
inline double series_tail(double a, std::size_t J) {
  double t = static_cast<double>(J);
  return std::pow(a, t + 1.0) * ((t + 3.0) - (t + 2.0) * a);
}

inline std::size_t series_cutoff(double a, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("series tolerance must be > 0");
  std::size_t J = 4;
  while (J < 50'000'000) {
    if (series_tail(a, J) < 0.5 * tol) return J;
    J = (J < 64) ? J + 8 : J + J / 8;
  }
  throw std::invalid_argument("series tolerance unattainable");
}

// sum_{j=0..J} a^j g((j+1) p / q) with g exact integer floor/ceil, Kahan-compensated
inline double lattice_sum(double a, long long p, long long q, std::size_t J,
                          bool want_ceil, double& abs_sum) {
  double s = 0.0, c = 0.0, aj = 1.0;
  abs_sum = 0.0;
  for (std::size_t j = 0; j <= J; ++j) {
    long long num = static_cast<long long>(j + 1) * p;
    long long k = want_ceil ? ceil_div(num, q) : floor_div(num, q);
    double term = aj * static_cast<double>(k);
    abs_sum += std::abs(term);
    double y = term - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
    aj *= a;
  }
  return s;
}

// as above for arbitrary real rho; near-integer products widen the result
inline void generic_sum(double a, double rho, std::size_t J, bool want_ceil,
                        double& lo, double& hi, double& abs_sum) {
  double slo = 0.0, shi = 0.0, clo = 0.0, chi = 0.0, aj = 1.0;
  abs_sum = 0.0;
  for (std::size_t j = 0; j <= J; ++j) {
    double y = (j + 1) * rho;
    double fz = 2.0 * DBL_EPSILON * std::max(1.0, std::abs(y));
    double klo = want_ceil ? std::ceil(y - fz) : std::floor(y - fz);
    double khi = want_ceil ? std::ceil(y + fz) : std::floor(y + fz);
    abs_sum += aj * std::max(std::abs(klo), std::abs(khi));
    double t, yy;
    yy = aj * klo - clo; t = slo + yy; clo = (t - slo) - yy; slo = t;
    yy = aj * khi - chi; t = shi + yy; chi = (t - shi) - yy; shi = t;
    aj *= a;
  }
  lo = slo;
  hi = shi;
}

inline double round_slop(double abs_sum) {
  return 8.0 * DBL_EPSILON * (abs_sum + 1.0);
}

inline void check_ab(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("slope a must satisfy 0 < a < 1");
}

inline void check_rho01(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
}

}  // namespace detail

/// Left endpoint of the offset plateau for a given rotation value:
/// b_-(a, rho) = (1-a)^2 sum_{j>=0} a^j ceil((j+1) rho), enclosed to width <= tol.
inline Enclosure b_lower(double a, double rho, double tol) {
  detail::check_ab(a);
  detail::check_rho01(rho);
  if (rho == 0.0) return Enclosure(0.0);
  if (rho == 1.0) return Enclosure(1.0);
  std::size_t J = detail::series_cutoff(a, tol);
  double slo, shi, abs_sum;
  detail::generic_sum(a, rho, J, /*ceil*/ true, slo, shi, abs_sum);
  double w = (1.0 - a) * (1.0 - a);
  double slop = detail::round_slop(abs_sum * w);
  double lo = std::max(0.0, w * slo - slop);
  double hi = w * shi + detail::series_tail(a, J) + slop;
  return Enclosure(lo, hi);
}

/// exact-lattice variant for rational rho = p/q
inline Enclosure b_lower(double a, long long p, long long q, double tol) {
  detail::check_ab(a);
  if (q < 1 || p < 0 || p > q) throw std::invalid_argument("b_lower: bad fraction");
  if (p == 0) return Enclosure(0.0);
  if (p == q) return Enclosure(1.0);
  std::size_t J = detail::series_cutoff(a, tol);
  double abs_sum;
  double s = detail::lattice_sum(a, p, q, J, /*ceil*/ true, abs_sum);
  double w = (1.0 - a) * (1.0 - a);
  double slop = detail::round_slop(abs_sum * w);
  return Enclosure(std::max(0.0, w * s - slop),
                   w * s + detail::series_tail(a, J) + slop);
}

/// Right endpoint of the plateau:
/// b_+(a, rho) = 1 - a + (1-a)^2 sum_{j>=0} a^j floor((j+1) rho).
inline Enclosure b_upper(double a, double rho, double tol) {
  detail::check_ab(a);
  detail::check_rho01(rho);
  if (rho == 0.0) return Enclosure(1.0 - a);
  std::size_t J = detail::series_cutoff(a, tol);
  double slo, shi, abs_sum;
  detail::generic_sum(a, rho, J, /*ceil*/ false, slo, shi, abs_sum);
  double w = (1.0 - a) * (1.0 - a);
  double slop = detail::round_slop(abs_sum * w + 1.0);
  return Enclosure((1.0 - a) + w * slo - slop,
                   (1.0 - a) + w * shi + detail::series_tail(a, J) + slop);
}

inline Enclosure b_upper(double a, long long p, long long q, double tol) {
  detail::check_ab(a);
  if (q < 1 || p < 0 || p > q) throw std::invalid_argument("b_upper: bad fraction");
  if (p == 0) return Enclosure(1.0 - a);
  std::size_t J = detail::series_cutoff(a, tol);
  double abs_sum;
  double s = detail::lattice_sum(a, p, q, J, /*ceil*/ false, abs_sum);
  double w = (1.0 - a) * (1.0 - a);
  double slop = detail::round_slop(abs_sum * w + 1.0);
  return Enclosure((1.0 - a) + w * s - slop,
                   (1.0 - a) + w * s + detail::series_tail(a, J) + slop);
}

/// closed-form plateau length a^{q-1}(1-a)^2/(1-a^q) for rho with reduced denominator q
inline double plateau_length(double a, long long q) {
  detail::check_ab(a);
  return std::pow(a, static_cast<double>(q - 1)) * (1.0 - a) * (1.0 - a) /
         (1.0 - std::pow(a, static_cast<double>(q)));
}

/// (1-a) psi(rho) = b - b_-(a, rho); psi is the height of the conjugation at 0
inline Enclosure psi(double a, double b, double rho, double tol) {
  Enclosure B = b_lower(a, rho, std::max(1e-17, tol * (1.0 - a)));
  return (b - B) / (1.0 - a);
}

inline Enclosure psi_right(double a, double b, double rho, double tol) {
  Enclosure B = b_upper(a, rho, std::max(1e-17, tol * (1.0 - a)));
  return (b - B) / (1.0 - a);
}

// exact-lattice variants for rational rho; the generic series necessarily
// widens at lattice hits, so these are the ones to use at certified p/q
inline Enclosure psi(double a, double b, long long p, long long q, double tol) {
  Enclosure B = b_lower(a, p, q, std::max(1e-17, tol * (1.0 - a)));
  return (b - B) / (1.0 - a);
}

inline Enclosure psi_right(double a, double b, long long p, long long q, double tol) {
  Enclosure B = b_upper(a, p, q, std::max(1e-17, tol * (1.0 - a)));
  return (b - B) / (1.0 - a);
}

/// phi_rho(x) = b/(1-a) + (1-a) sum_{j>=0} a^j floor(x - (j+1) rho);
/// the conjugating map between the rigid rotation by rho and the interval map.
inline Enclosure phi_rho(double a, double b, double rho, double x, double tol) {
  detail::check_ab(a);
  std::size_t J = detail::series_cutoff(a, std::max(1e-17, tol * (1.0 - a)));
  double slo = 0.0, shi = 0.0, abs_sum = 0.0, aj = 1.0;
  for (std::size_t j = 0; j <= J; ++j) {
    double y = x - (j + 1) * rho;
    double fz = 4.0 * DBL_EPSILON * std::max(1.0, std::abs(y));
    double klo = std::floor(y - fz);
    double khi = std::floor(y + fz);
    abs_sum += aj * std::max(std::abs(klo), std::abs(khi));
    slo += aj * klo;
    shi += aj * khi;
    aj *= a;
  }
  // coefficient bound |floor(x-(j+1)rho)| <= |x| + j + 2 for rho in [0,1]
  double tail = (detail::series_tail(a, J) / (1.0 - a)) * (1.0 + std::abs(x));
  double slop = detail::round_slop(abs_sum);
  double base = b / (1.0 - a);
  return Enclosure(base + (1.0 - a) * slo - tail - slop,
                   base + (1.0 - a) * shi + tail + slop);
}

/// exact evaluation of phi_{p/q}(k/q) via the period-q closed form
inline double phi_rho_lattice(double a, double b, long long p, long long q, long long k) {
  detail::check_ab(a);
  if (q < 1) throw std::invalid_argument("phi_rho_lattice: q must be >= 1");
  double S1 = 0.0, S2 = 0.0, ar = 1.0;
  for (long long r = 0; r < q; ++r) {
    S1 += ar * static_cast<double>(detail::floor_div(k - (r + 1) * p, q));
    S2 += ar;
    ar *= a;
  }
  double aq = std::pow(a, static_cast<double>(q));
  double S = S1 / (1.0 - aq) - static_cast<double>(p) * aq * S2 / ((1.0 - aq) * (1.0 - aq));
  return b / (1.0 - a) + (1.0 - a) * S;
}

/// [F^n(0)/n - 1/n, F^n(0)/n + 1/n] intersected with [0,1); the elementary
/// two-sided bound on the rotation number from a single lift orbit.
inline Enclosure rotation_number_orbit_estimate(const MapParams& par, std::size_t n) {
  if (n < 1) throw std::invalid_argument("orbit estimate needs n >= 1");
  double x = 0.0;
  long long wind = 0;  // integer part of the lift, tracked exactly
  for (std::size_t i = 0; i < n; ++i) {
    double z = par.a * x + par.b;
    long long e = static_cast<long long>(std::floor(z));
    wind += e;
    x = z - static_cast<double>(e);
  }
  double est = (static_cast<double>(wind) + x) / static_cast<double>(n);
  double inv = 1.0 / static_cast<double>(n);
  return Enclosure(std::max(0.0, est - inv), std::min(1.0, est + inv));
}

enum class PlateauSide { lower_boundary, interior, upper_boundary };

struct RationalRotation {
  long long p = 0;
  long long q = 1;
  PlateauSide side = PlateauSide::interior;
  bool boundary_uncertain = false;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// Either a certified reduced rational p/q (offset verified to lie in the
/// plateau [b_-, b_+]) or a bracketing enclosure.
class RotationNumber {
 public:
  static RotationNumber make_rational(RationalRotation r) {
    RotationNumber n;
    n.rat_ = r;
    n.enc_ = Enclosure(r.value());
    return n;
  }
  static RotationNumber make_enclosure(Enclosure e, bool boundary_ambiguous = false) {
    RotationNumber n;
    n.enc_ = e;
    n.ambiguous_ = boundary_ambiguous;
    return n;
  }

  bool is_rational() const { return rat_.has_value(); }
  const RationalRotation& rational() const {
    if (!rat_) throw std::logic_error("RotationNumber: not rational");
    return *rat_;
  }
  const Enclosure& enclosure() const { return enc_; }
  bool boundary_ambiguous() const { return ambiguous_; }
  double estimate() const { return rat_ ? rat_->value() : enc_.mid(); }

 private:
  std::optional<RationalRotation> rat_;
  Enclosure enc_;
  bool ambiguous_ = false;
};

struct RotationOptions {
  long long q_max = 64;
  double tol = 1e-12;
};

namespace detail {

// -1: rho < p/q, +1: rho > p/q, 0: certified (rr filled in).
// Offsets within certification slack of a plateau endpoint are reported as
// that boundary with boundary_uncertain set; the endpoint trichotomy is
// discontinuous in b, so guessing a side there would be meaningless.
inline int plateau_test(double a, double b, long long p, long long q,
                        RationalRotation& rr) {
  double width = plateau_length(a, q);
  double tolb = std::clamp(width / 16.0, 1e-17, 1e-13);
  Enclosure bm = b_lower(a, p, q, tolb);
  Enclosure bp = b_upper(a, p, q, tolb);
  if (bm.width() == 0.0 && b == bm.lo) {
    rr = {p, q, PlateauSide::lower_boundary, false};
    return 0;
  }
  if (bp.width() == 0.0 && b == bp.lo) {
    rr = {p, q, PlateauSide::upper_boundary, false};
    return 0;
  }
  double slack_m = bm.width() + 8.0 * DBL_EPSILON * (1.0 + std::abs(b));
  double slack_p = bp.width() + 8.0 * DBL_EPSILON * (1.0 + std::abs(b));
  if (b >= bm.lo - slack_m && b <= bm.hi + slack_m) {
    rr = {p, q, PlateauSide::lower_boundary, true};
    return 0;
  }
  if (b >= bp.lo - slack_p && b <= bp.hi + slack_p) {
    rr = {p, q, PlateauSide::upper_boundary, true};
    return 0;
  }
  if (b < bm.lo) return -1;
  if (b > bp.hi) return +1;
  rr = {p, q, PlateauSide::interior, false};
  return 0;
}

}  // namespace detail

/// Certified rotation number.
///
/// Descends the Stern-Brocot tree testing each mediant's plateau with the
/// interval condition b_- <= b <= b_+ (the mediant of the current bracket is
/// the simplest rational inside it, so every certifiable denominator is
/// visited).  Once mediant denominators exceed q_max, falls back to plain
/// bisection on the sign of b - b_-(a, rho), which is monotone in rho.
inline RotationNumber rotation_number(const MapParams& par, RotationOptions opt = {}) {
  par.require_contractive("rotation_number");
  if (opt.q_max < 1) throw std::invalid_argument("rotation_number: q_max must be >= 1");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("rotation_number: tol must be > 0");
  const double a = par.a, b = par.b;

  RationalRotation rr;
  int c = detail::plateau_test(a, b, 0, 1, rr);
  if (c == 0) return RotationNumber::make_rational(rr);
  // rho(a,b) >= 0 always, so c == -1 cannot happen for the 0/1 plateau

  long long pl = 0, ql = 1, pr = 1, qr = 1;  // rho in (pl/ql, pr/qr)
  while (true) {
    long long pm = pl + pr, qm = ql + qr;
    if (qm > opt.q_max) break;
    c = detail::plateau_test(a, b, pm, qm, rr);
    if (c == 0) return RotationNumber::make_rational(rr);
    if (c < 0) {
      pr = pm;
      qr = qm;
    } else {
      pl = pm;
      ql = qm;
    }
  }

  double lo = static_cast<double>(pl) / static_cast<double>(ql);
  double hi = static_cast<double>(pr) / static_cast<double>(qr);
  bool ambiguous = false;
  while (hi - lo > opt.tol) {
    double mid = lo + 0.5 * (hi - lo);
    Enclosure bm = b_lower(a, mid, 1e-15);
    if (b >= bm.hi) {
      lo = mid;
    } else if (b < bm.lo) {
      hi = mid;
    } else {
      bm = b_lower(a, mid, 1e-17);
      if (b >= bm.hi) {
        lo = mid;
      } else if (b < bm.lo) {
        hi = mid;
      } else {
        // the probe landed where b_-(mid) cannot be separated from b; nudge it
        double mid2 = lo + 0.4921875 * (hi - lo);
        if (mid2 <= lo || mid2 == mid) { ambiguous = true; break; }
        bm = b_lower(a, mid2, 1e-17);
        if (b >= bm.hi) lo = mid2;
        else if (b < bm.lo) hi = mid2;
        else { ambiguous = true; break; }
      }
    }
  }
  return RotationNumber::make_enclosure(Enclosure(lo, hi), ambiguous);
}

struct Plateau {
  long long p = 0;
  long long q = 1;
  Enclosure b_minus;
  Enclosure b_plus;
};

inline Plateau plateau(double a, long long p, long long q, double tol = 1e-15) {
  if (q < 1 || p < 0 || p >= q || std::gcd(p, q) != 1)
    throw std::invalid_argument("plateau: need reduced p/q in [0, 1)");
  return Plateau{p, q, b_lower(a, p, q, tol), b_upper(a, p, q, tol)};
}

struct PlateauSweep {
  std::vector<Plateau> plateaus;  // ascending by p/q, pairwise disjoint
  double total_length = 0.0;      // closed-form lengths, compensated sum
  double lower_bound = 0.0;       // 1 - (q_max + 1/(1-a)) a^{q_max}
};

inline PlateauSweep plateau_sweep(double a, long long q_max, unsigned jobs = 1) {
  detail::check_ab(a);
  if (q_max < 1) throw std::invalid_argument("plateau_sweep: q_max must be >= 1");
  // ascending Farey enumeration of order q_max over [0, 1)
  std::vector<std::pair<long long, long long>> fracs;
  long long fa = 0, fb = 1, fc = 1, fd = q_max;
  while (true) {
    fracs.emplace_back(fa, fb);
    long long k = (q_max + fb) / fd;
    long long fe = k * fc - fa, ff = k * fd - fb;
    fa = fc; fb = fd; fc = fe; fd = ff;
    if (fa >= fb) break;  // reached 1/1
  }
  PlateauSweep out;
  out.plateaus.resize(fracs.size());
  auto fill = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < fracs.size(); i += stride)
      out.plateaus[i] = plateau(a, fracs[i].first, fracs[i].second);
  };
  if (jobs <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(fill, t, jobs);
    for (auto& th : pool) th.join();
  }
  double sum = 0.0, comp = 0.0;
  for (const auto& [p, q] : fracs) {
    double y = plateau_length(a, q) - comp, t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  out.total_length = sum;
  out.lower_bound = 1.0 - (static_cast<double>(q_max) + 1.0 / (1.0 - a)) *
                              std::pow(a, static_cast<double>(q_max));
  if (out.total_length > 1.0 + 1e-9)
    throw std::logic_error("plateau_sweep: lengths exceed 1");
  return out;
}

/// mean of the first n orbit points (streaming, compensated)
inline double orbit_mean(const MapParams& par, double x0, std::size_t n,
                         BranchPolicy policy, double tau_eps = default_tau_eps) {
  if (n < 1) throw std::invalid_argument("orbit_mean: n must be >= 1");
  std::optional<double> tau = discontinuity(par);
  double x = x0, sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double y = x - comp, t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (tau && std::abs(x - *tau) <= tau_eps)
      x = (policy.choose() == Branch::upper) ? step_upper(par, x, tau_eps)
                                             : step_lower(par, x, tau_eps);
    else
      x = step_lower(par, x, tau_eps);
  }
  return sum / static_cast<double>(n);
}

/// chi = (b - rho)/(1 - a): the asymptotic average of every orbit
inline double chi(const MapParams& par, double rho) {
  par.require_contractive("chi");
  return (par.b - rho) / (1.0 - par.a);
}

struct SymbolStats {
  double mean_eps = 0.0;
  double max_partial_deviation = 0.0;  // max_n |sum_{i<n} eps_i - rho n|
};

inline SymbolStats symbol_frequency_check(const Orbit& o, double rho) {
  if (o.symbols.size() < 1)
    throw std::invalid_argument("symbol_frequency_check: need an orbit of length >= 2");
  SymbolStats st;
  long long S = 0;
  for (std::size_t n = 0; n < o.symbols.size(); ++n) {
    S += o.symbols[n];
    double dev = std::abs(static_cast<double>(S) - rho * static_cast<double>(n + 1));
    st.max_partial_deviation = std::max(st.max_partial_deviation, dev);
  }
  st.mean_eps = static_cast<double>(S) / static_cast<double>(o.symbols.size());
  return st;
}

struct PeriodicOrbitInfo {
  std::vector<double> points;  // ascending, |points| = q
  long long p = 0;
  long long q = 1;
  PlateauSide boundary_case = PlateauSide::interior;
  bool boundary_uncertain = false;
};

/// The unique periodic orbit {phi_rho(k/q)} when the rotation number
/// certifies as rational; nullopt when it does not.  Each point is checked
/// to return to itself after q steps of the map.
inline std::optional<PeriodicOrbitInfo> periodic_orbit(const MapParams& par,
                                                       RotationOptions opt = {}) {
  RotationNumber rn = rotation_number(par, opt);
  if (!rn.is_rational()) return std::nullopt;
  const RationalRotation& r = rn.rational();
  PeriodicOrbitInfo info;
  info.p = r.p;
  info.q = r.q;
  info.boundary_case = r.side;
  info.boundary_uncertain = r.boundary_uncertain;
  info.points.reserve(r.q);
  for (long long k = 0; k < r.q; ++k) {
    double x = phi_rho_lattice(par.a, par.b, r.p, r.q, k);
    info.points.push_back(std::clamp(x, 0.0, 1.0));
  }
  BranchPolicy::Kind kind = (r.side == PlateauSide::upper_boundary)
                                ? BranchPolicy::Kind::always_upper
                                : BranchPolicy::Kind::always_lower;
  for (double x0 : info.points) {
    BranchPolicy pol = (kind == BranchPolicy::Kind::always_upper)
                           ? BranchPolicy::always_upper()
                           : BranchPolicy::always_lower();
    Orbit o = orbit(par, x0, static_cast<std::size_t>(r.q), pol);
    if (std::abs(o.points.back() - x0) > 1e-9)
      throw std::logic_error("periodic_orbit: cycle failed to close within 1e-9");
  }
  return info;
}

}  // namespace circlemap
