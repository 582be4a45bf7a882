#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace circlemap {

constexpr double default_tau_eps = 1e-12;

inline double frac(double x) { return x - std::floor(x); }

// left-continuous fractional part: 1 at integers instead of 0
inline double frac_upper(double x) {
  double f = frac(x);
  return (f == 0.0 && std::floor(x) == x) ? 1.0 : f;
}

/// Parameters of the interval map f(x) = {a x + b}.
///
/// Standing assumptions: 0 < a < 1 and 0 <= b < 1.  The degenerate slope
/// a == 1 (a plain circle rotation) is admitted only through
/// rotation_limit(); it is needed by the two-party election reduction when
/// no ballot names both parties, and is rejected by every operation that
/// relies on contraction.
struct MapParams {
  double a;
  double b;

  MapParams(double slope, double offset) : a(slope), b(offset) {
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("MapParams: slope a must satisfy 0 < a < 1");
    if (!(b >= 0.0 && b < 1.0))
      throw std::invalid_argument("MapParams: offset b must satisfy 0 <= b < 1");
  }

  static MapParams rotation_limit(double offset) {
    MapParams p(0.5, offset);  // placeholder slope, replaced below
    p.a = 1.0;
    return p;
  }

  bool is_rotation() const { return a == 1.0; }

  void require_contractive(const char* who) const {
    if (is_rotation())
      throw std::invalid_argument(std::string(who) + ": a = 1 not supported");
  }
};

/// Discontinuity point of x -> {a x + b} in [0, 1], when it exists:
/// tau = (1-b)/a if a+b >= 1, tau = 0 if b = 0, absent when a+b < 1 and b > 0.
inline std::optional<double> discontinuity(const MapParams& p) {
  if (p.b == 0.0) return 0.0;
  if (p.a + p.b >= 1.0) return (1.0 - p.b) / p.a;
  return std::nullopt;
}

namespace detail {
// fractional part of a x + b with results within eps of an integer snapped,
// so the two branches stay exactly {0,1}-separated at tau
inline double step_frac(const MapParams& p, double x, double eps, bool upper) {
  double z = p.a * x + p.b;
  double u = z - std::floor(z);
  if (u <= eps || u >= 1.0 - eps) return upper ? 1.0 : 0.0;
  return u;
}
}  // namespace detail

/// Right-continuous branch f_-(x) = {a x + b}, values in [0, 1).
inline double step_lower(const MapParams& p, double x,
                         double tau_eps = default_tau_eps) {
  return detail::step_frac(p, x, tau_eps, false);
}

/// Left-continuous branch f_+(x), equal to f_- except that it takes the
/// value 1 where a x + b is an integer.
inline double step_upper(const MapParams& p, double x,
                         double tau_eps = default_tau_eps) {
  return detail::step_frac(p, x, tau_eps, true);
}

/// Lift F_-(x) = a{x} + b + floor(x); strictly increasing, F(x+1) = F(x)+1.
inline double lift_lower(const MapParams& p, double x) {
  return p.a * frac(x) + p.b + std::floor(x);
}

/// Lift F_+(x) = F_-(x-).
inline double lift_upper(const MapParams& p, double x) {
  return p.a * frac_upper(x) + p.b + (std::ceil(x) - 1.0);
}

/// Single-valued inverse of f_{+/-}, defined on [0, a+b-1] u [b, 1].
/// Requires a + b > 1.
inline std::optional<double> inverse(const MapParams& p, double y,
                                     double tau_eps = default_tau_eps) {
  if (!(p.a + p.b > 1.0))
    throw std::invalid_argument("inverse: requires a + b > 1");
  if (y >= -tau_eps && y <= p.a + p.b - 1.0 + tau_eps) {
    double x = (y + 1.0 - p.b) / p.a;
    return std::clamp(x, 0.0, 1.0);
  }
  if (y >= p.b - tau_eps && y <= 1.0 + tau_eps) {
    double x = (y - p.b) / p.a;
    return std::clamp(x, 0.0, 1.0);
  }
  return std::nullopt;
}

/// Conjugate parameters under the reflection s(x) = 1 - x: (a, {-(a+b)}).
inline MapParams reflect(const MapParams& p) {
  double br = frac(-(p.a + p.b));
  if (br >= 1.0) br = 0.0;
  return MapParams(p.a, br);
}

enum class Branch { lower, upper };

/// Resolves the two-valued choice at visits to tau.  Scripted choices are
/// consumed only at tau visits; running out of script entries is an error.
class BranchPolicy {
 public:
  enum class Kind { always_lower, always_upper, scripted, seeded_random };

  static BranchPolicy always_lower() { return BranchPolicy(Kind::always_lower); }
  static BranchPolicy always_upper() { return BranchPolicy(Kind::always_upper); }
  static BranchPolicy scripted(std::vector<Branch> choices) {
    BranchPolicy p(Kind::scripted);
    p.script_ = std::move(choices);
    return p;
  }
  static BranchPolicy seeded(std::uint64_t seed) {
    BranchPolicy p(Kind::seeded_random);
    p.rng_.seed(seed);
    return p;
  }

  Kind kind() const { return kind_; }

  Branch choose() {
    switch (kind_) {
      case Kind::always_lower: return Branch::lower;
      case Kind::always_upper: return Branch::upper;
      case Kind::scripted:
        if (cursor_ >= script_.size())
          throw std::runtime_error("BranchPolicy: scripted choices exhausted at a tau visit");
        return script_[cursor_++];
      case Kind::seeded_random:
        return (rng_() & 1u) ? Branch::upper : Branch::lower;
    }
    throw std::logic_error("BranchPolicy: bad kind");
  }

 private:
  explicit BranchPolicy(Kind k) : kind_(k) {}
  Kind kind_;
  std::vector<Branch> script_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
};

/// A finite trajectory with per-step branch choices and the symbolic
/// sequence eps_i = a x_i + b - x_{i+1}.
struct Orbit {
  std::vector<double> points;                            // n+1 entries
  std::vector<int> symbols;                              // n entries
  std::vector<std::pair<std::size_t, Branch>> choices_at_tau;
};

inline Orbit orbit(const MapParams& p, double x0, std::size_t n,
                   BranchPolicy policy, double tau_eps = default_tau_eps) {
  if (!(x0 >= 0.0 && x0 <= 1.0))
    throw std::invalid_argument("orbit: x0 must lie in [0, 1]");
  Orbit o;
  o.points.reserve(n + 1);
  o.symbols.reserve(n);
  o.points.push_back(x0);
  std::optional<double> tau = discontinuity(p);
  double x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    double next;
    if (tau && std::abs(x - *tau) <= tau_eps) {
      Branch br = policy.choose();
      o.choices_at_tau.emplace_back(i, br);
      next = (br == Branch::upper) ? step_upper(p, x, tau_eps)
                                   : step_lower(p, x, tau_eps);
    } else {
      next = step_lower(p, x, tau_eps);
    }
    double raw = p.a * x + p.b - next;
    int eps = static_cast<int>(std::lround(raw));
    if (std::abs(raw - eps) > 1e-9)
      throw std::logic_error("orbit: symbol defect exceeds 1e-9");
    o.symbols.push_back(eps);
    o.points.push_back(next);
    x = next;
  }
  return o;
}

}  // namespace circlemap
