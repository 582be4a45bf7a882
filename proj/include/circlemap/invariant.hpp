#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "circlemap/map.hpp"
#include "circlemap/rotation.hpp"

namespace circlemap {

/// Sorted disjoint closed subintervals of [0, 1].
struct IntervalUnion {
  std::vector<std::pair<double, double>> intervals;

  double total_length() const {
    double sum = 0.0, comp = 0.0;
    for (const auto& [lo, hi] : intervals) {
      double y = (hi - lo) - comp, t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum;
  }

  bool covers(double x, double slack = 0.0) const {
    for (const auto& [lo, hi] : intervals)
      if (x >= lo - slack && x <= hi + slack) return true;
    return false;
  }

  double distance_to(double x) const {
    double d = 1.0;
    for (const auto& [lo, hi] : intervals) {
      if (x >= lo && x <= hi) return 0.0;
      d = std::min(d, std::min(std::abs(x - lo), std::abs(x - hi)));
    }
    return d;
  }
};

/// n-fold image of [0,1] under the two-branch map: at most n+1 disjoint
/// closed intervals of total length a^n.  Each step splits the single
/// interval containing the discontinuity and maps both pieces affinely.
inline IntervalUnion invariant_intervals(const MapParams& par, std::size_t n) {
  const double a = par.a, b = par.b;
  std::optional<double> tau = discontinuity(par);
  std::vector<std::pair<double, double>> cur = {{0.0, 1.0}};
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<std::pair<double, double>> next;
    next.reserve(cur.size() + 1);
    bool split_done = false;  // tau lies in at most one interval; enforce under rounding
    for (const auto& [u, v] : cur) {
      if (!split_done && tau && u <= *tau && *tau <= v) {
        split_done = true;
        if (b == 0.0) {
          // tau = 0: the left piece is the single point mapped to 1
          next.emplace_back(1.0, 1.0);
          next.emplace_back(a * u, a * v);
        } else {
          next.emplace_back(a * u + b, 1.0);               // upper branch on [u, tau]
          next.emplace_back(0.0, a * v + b - 1.0);         // lower branch on [tau, v]
        }
      } else if (a * v + b <= 1.0 || b == 0.0) {
        double off = (b == 0.0 && u > 0.0) ? 0.0 : b;
        next.emplace_back(a * u + off, a * v + off);
      } else {
        next.emplace_back(a * u + b - 1.0, a * v + b - 1.0);
      }
    }
    for (auto& iv : next) {
      iv.first = std::clamp(iv.first, 0.0, 1.0);
      iv.second = std::clamp(iv.second, iv.first, 1.0);
    }
    std::sort(next.begin(), next.end());
    cur = std::move(next);
  }
  return IntervalUnion{std::move(cur)};
}

/// true when the enclosure contains no rational with denominator <= q_max,
/// i.e. it certifies the map is outside every resolvable plateau
inline bool is_irrational_regime(const Enclosure& e, long long q_max) {
  for (long long q = 1; q <= q_max; ++q) {
    long long plo = static_cast<long long>(std::ceil(e.lo * static_cast<double>(q) - 1e-18));
    long long phi = static_cast<long long>(std::floor(e.hi * static_cast<double>(q) + 1e-18));
    if (plo <= phi) return false;
  }
  return true;
}

struct Gap {
  double lo = 0.0;   // phi_rho(x_i-)
  double hi = 0.0;   // phi_rho(x_i)
  double err = 0.0;  // endpoint slack from the rotation enclosure's width
};

/// Complement gaps of the Cantor invariant set, indexed by i = 1..m:
/// (l_i, r_i) = (phi(x_i-), phi(x_i)) at x_i = frac(i rho), evaluated at the
/// enclosure midpoint.  Gap i has length (1-a) a^{i-1}.
inline std::vector<Gap> gaps(const MapParams& par, const RotationNumber& rho,
                             std::size_t m, double tol, long long q_max = 64) {
  par.require_contractive("gaps");
  if (rho.is_rational())
    throw std::invalid_argument("gaps: rotation number certified rational; no Cantor gaps");
  if (!is_irrational_regime(rho.enclosure(), q_max))
    throw std::invalid_argument("gaps: enclosure does not exclude low-denominator plateaus");
  const double a = par.a, b = par.b;
  const double rh = rho.enclosure().mid();
  // cutoff so that the truncated part of the shifted series stays below tol/2;
  // must also reach past j = m-1 so every lattice term is present
  std::size_t J = m + 1;
  while (detail::series_tail(a, J) / (1.0 - a) > 0.5 * tol) J += J / 2 + 8;

  const double half_width = 0.5 * rho.enclosure().width();
  std::vector<Gap> out;
  out.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) {
    // phi(x_i) = b/(1-a) + (1-a) sum_j a^j floor((i-1-j) rho) - floor(i rho);
    // the j = i-1 term is an exact lattice hit: floor(0) = 0 from the right,
    // -1 from the left.  Terms whose argument could cross an integer within
    // the enclosure's width are charged to the reported slack instead of
    // being silently rounded one way.
    double K = std::floor(static_cast<double>(i) * rh);
    double s_right = 0.0, s_left = 0.0, err = 0.0, aj = 1.0;
    for (std::size_t j = 0; j <= J; ++j) {
      long long mm = static_cast<long long>(i) - 1 - static_cast<long long>(j);
      if (mm == 0) {
        s_left += aj * (-1.0);
        aj *= a;
        continue;
      }
      double y = static_cast<double>(mm) * rh;
      double fl = std::floor(y);
      double lattice_dist = std::min(y - fl, fl + 1.0 - y);
      if (lattice_dist <= std::abs(static_cast<double>(mm)) * half_width)
        err += (1.0 - a) * aj;
      s_right += aj * fl;
      s_left += aj * fl;
      aj *= a;
    }
    double base = b / (1.0 - a) - K;
    out.push_back(Gap{base + (1.0 - a) * s_left, base + (1.0 - a) * s_right, err});
  }
  return out;
}

enum class DynamicsClass { case1a, case1b_zero, case1b_one, case2 };

struct Classification {
  DynamicsClass cls = DynamicsClass::case2;
  bool boundary_uncertain = false;
  RotationNumber rho = RotationNumber::make_enclosure(Enclosure(0.0, 1.0));
};

/// Orbit-structure trichotomy: periodic cycle away from the discontinuity
/// (1a), cycle through 0 or through 1 (1b), or no cycle at all (2).
inline Classification classify(const MapParams& par, RotationOptions opt = {}) {
  Classification c;
  c.rho = rotation_number(par, opt);
  if (!c.rho.is_rational()) {
    c.cls = DynamicsClass::case2;
    c.boundary_uncertain = c.rho.boundary_ambiguous();
    return c;
  }
  const RationalRotation& r = c.rho.rational();
  c.boundary_uncertain = r.boundary_uncertain;
  switch (r.side) {
    case PlateauSide::lower_boundary: c.cls = DynamicsClass::case1b_zero; break;
    case PlateauSide::upper_boundary: c.cls = DynamicsClass::case1b_one; break;
    case PlateauSide::interior: c.cls = DynamicsClass::case1a; break;
  }
  return c;
}

struct Gauge {
  enum class Kind { power, log_inv, log_inv_sq };
  Kind kind = Kind::log_inv;
  double alpha = 1.0;

  static Gauge power(double alpha) { return Gauge{Kind::power, alpha}; }
  static Gauge log_inv() { return Gauge{Kind::log_inv, 0.0}; }
  static Gauge log_inv_sq() { return Gauge{Kind::log_inv_sq, 0.0}; }
};

/// Covering value (n+1) h(a^n) for the n-th interval cover of the invariant
/// set; with h(t) = 1/|log t| it stays bounded by ~1/|log a|.
inline double gauge_cover_value(const MapParams& par, std::size_t n, Gauge g) {
  if (n < 1) throw std::invalid_argument("gauge_cover_value: n must be >= 1");
  double nn = static_cast<double>(n);
  double la = std::log(par.a);  // negative
  switch (g.kind) {
    case Gauge::Kind::power:
      return (nn + 1.0) * std::exp(nn * g.alpha * la);
    case Gauge::Kind::log_inv:
      return (nn + 1.0) / (nn * std::abs(la));
    case Gauge::Kind::log_inv_sq:
      return (nn + 1.0) / (nn * la * nn * la);
  }
  throw std::logic_error("gauge_cover_value: bad kind");
}

struct MeasureSample {
  enum class Kind { empirical, pushforward };
  Kind kind = Kind::empirical;
  double a = 0.0, b = 0.0;
  std::vector<double> points;

  double mean() const {
    double s = 0.0, c = 0.0;
    for (double x : points) {
      double y = x - c, t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s / static_cast<double>(points.size());
  }
};

/// first n points of an orbit, as a sample of the invariant measure
inline MeasureSample empirical_measure(const MapParams& par, double x0, std::size_t n,
                                       BranchPolicy policy,
                                       double tau_eps = default_tau_eps) {
  if (n < 1) throw std::invalid_argument("empirical_measure: n must be >= 1");
  MeasureSample s;
  s.kind = MeasureSample::Kind::empirical;
  s.a = par.a;
  s.b = par.b;
  s.points.reserve(n);
  std::optional<double> tau = discontinuity(par);
  double x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    s.points.push_back(x);
    if (tau && std::abs(x - *tau) <= tau_eps)
      x = (policy.choose() == Branch::upper) ? step_upper(par, x, tau_eps)
                                             : step_lower(par, x, tau_eps);
    else
      x = step_lower(par, x, tau_eps);
  }
  return s;
}

/// {phi((k+1/2)/m)}: the invariant measure as the image of the uniform grid
inline MeasureSample pushforward_measure(const MapParams& par, const RotationNumber& rho,
                                         std::size_t m_points, double tol,
                                         long long q_max = 64) {
  par.require_contractive("pushforward_measure");
  if (rho.is_rational())
    throw std::invalid_argument("pushforward_measure: rational rotation number");
  if (!is_irrational_regime(rho.enclosure(), q_max))
    throw std::invalid_argument("pushforward_measure: enclosure not in the irrational regime");
  if (m_points < 1) throw std::invalid_argument("pushforward_measure: m must be >= 1");
  MeasureSample s;
  s.kind = MeasureSample::Kind::pushforward;
  s.a = par.a;
  s.b = par.b;
  s.points.reserve(m_points);
  double rh = rho.enclosure().mid();
  for (std::size_t k = 0; k < m_points; ++k) {
    double x = (static_cast<double>(k) + 0.5) / static_cast<double>(m_points);
    s.points.push_back(phi_rho(par.a, par.b, rh, x, tol).mid());
  }
  return s;
}

/// one value per line; the header row names the sample kind and parameters
inline void write_csv(const MeasureSample& s, std::ostream& os) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  os << "value_"
     << (s.kind == MeasureSample::Kind::empirical ? "empirical" : "pushforward")
     << "_a=";
  put(s.a);
  os << "_b=";
  put(s.b);
  os << "\n";
  for (double x : s.points) {
    put(x);
    os << "\n";
  }
}

}  // namespace circlemap
