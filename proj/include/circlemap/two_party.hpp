#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "circlemap/election.hpp"
#include "circlemap/map.hpp"
#include "circlemap/rotation.hpp"

namespace circlemap {

/// Vote shares for two parties A, B and the joint ballot AB.
struct TwoPartyVotes {
  double alpha = 0.0;     // share voting A only
  double beta = 0.0;      // share voting B only
  double gamma_ab = 0.0;  // share voting AB

  TwoPartyVotes(double al, double be, double ga) : alpha(al), beta(be), gamma_ab(ga) {
    if (!(al >= 0.0 && be >= 0.0 && ga >= 0.0))
      throw std::invalid_argument("TwoPartyVotes: shares must be >= 0");
    if (std::abs(al + be + ga - 1.0) > 1e-12)
      throw std::invalid_argument("TwoPartyVotes: shares must sum to 1");
    if (!(al + be > 0.0))
      throw std::invalid_argument("TwoPartyVotes: alpha + beta must be positive");
  }

  BallotProfile profile() const {
    std::vector<std::pair<PartySet, double>> raw;
    if (alpha > 0) raw.emplace_back(0b01u, alpha);
    if (beta > 0) raw.emplace_back(0b10u, beta);
    if (gamma_ab > 0) raw.emplace_back(0b11u, gamma_ab);
    return BallotProfile(2, std::move(raw), {"A", "B"});
  }

  TwoPartyVotes swapped() const { return TwoPartyVotes(beta, alpha, gamma_ab); }
};

/// Closed-form reduction of the two-party sequential allocation to the
/// interval map: slope a, raw offset b_raw with integer part b0, start point
/// w0 = frac(alpha/beta) after an initial run of ell seats for A.
struct ReducedMap {
  double a = 0.0;
  double b_raw = 0.0;
  double b = 0.0;
  long long b0 = 0;
  double w0 = 0.0;
  long long ell = 0;
};

inline ReducedMap derive_map(const TwoPartyVotes& v) {
  const double al = v.alpha, be = v.beta, ga = v.gamma_ab;
  if (!(al > be && be > 0.0))
    throw std::invalid_argument("derive_map: requires alpha > beta > 0 (swap first)");
  ReducedMap rm;
  if (ga == 0.0) {
    rm.a = 1.0;
    rm.b_raw = 1.0 / be - 2.0;
  } else {
    rm.a = al * be / ((1.0 - al) * (1.0 - be));
    rm.b_raw = (al - be) / be + al * ga / ((1.0 - al) * (1.0 - be));
  }
  double lhs = rm.a + rm.b_raw;
  double rhs = al / (be * (1.0 - be)) - 1.0;
  if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs)))
    throw std::logic_error("derive_map: slope/offset consistency identity failed");
  rm.b = frac(rm.b_raw);
  rm.b0 = static_cast<long long>(std::floor(rm.b_raw));
  rm.w0 = frac(al / be);
  rm.ell = static_cast<long long>(std::floor(al / be));
  return rm;
}

struct PBPrediction {
  Enclosure pB;
  std::optional<long long> b0;
  std::optional<RotationNumber> rho;
};

/// Limiting seat share for B: pB = 1/(2 + b0 + rho), with the special cases
/// beta = 0 (everything to A), alpha = beta (perfect alternation) and
/// gamma_ab = 0 (pure rotation, rho = b).
inline PBPrediction predicted_pB(const TwoPartyVotes& v, RotationOptions opt = {}) {
  if (v.alpha < v.beta)
    throw std::invalid_argument("predicted_pB: requires alpha >= beta (swap and mirror)");
  PBPrediction out;
  if (v.beta == 0.0) {
    // alpha > 0 is guaranteed by the vote invariants; everything goes to A
    out.pB = Enclosure(0.0);
    return out;
  }
  if (v.alpha == v.beta) {
    out.pB = Enclosure(0.5);
    out.b0 = 0;
    out.rho = RotationNumber::make_rational({0, 1, PlateauSide::interior, false});
    return out;
  }
  ReducedMap rm = derive_map(v);
  out.b0 = rm.b0;
  if (v.gamma_ab == 0.0) {
    out.rho = RotationNumber::make_enclosure(Enclosure(rm.b));
    out.pB = Enclosure(1.0 / (2.0 + static_cast<double>(rm.b0) + rm.b));
    return out;
  }
  if (rm.a > 1.0 - 1e-12) {
    // joint-ballot share so small that the slope is within rounding of 1;
    // the elementary bound a + b - 1 <= rho <= b is already this tight
    Enclosure rho(std::max(0.0, rm.a + rm.b - 1.0), rm.b);
    out.rho = RotationNumber::make_enclosure(rho);
    const double base = 2.0 + static_cast<double>(rm.b0);
    out.pB = Enclosure(1.0 / (base + rho.hi), 1.0 / (base + rho.lo));
    return out;
  }
  RotationNumber rn = rotation_number(MapParams(rm.a, rm.b), opt);
  out.rho = rn;
  const double base = 2.0 + static_cast<double>(rm.b0);
  if (rn.is_rational()) {
    out.pB = Enclosure(1.0 / (base + rn.rational().value()));
  } else {
    out.pB = Enclosure(1.0 / (base + rn.enclosure().hi),
                       1.0 / (base + rn.enclosure().lo));
  }
  return out;
}

/// Seat sequence predicted from the symbolic dynamics: initial A^ell, then
/// each symbol expands to B A^{b0+1+eps}.  Steps taken at the discontinuity
/// are tie-break dependent; their seats carry the tie flag.
inline SeatSequence predicted_seats(const TwoPartyVotes& v, std::size_t n_seats,
                                    BranchPolicy policy,
                                    double tau_eps = default_tau_eps) {
  if (!(v.alpha > v.beta && v.beta > 0.0))
    throw std::invalid_argument("predicted_seats: requires alpha > beta > 0");
  ReducedMap rm = derive_map(v);
  MapParams par = (v.gamma_ab == 0.0) ? MapParams::rotation_limit(rm.b)
                                      : MapParams(rm.a, rm.b);
  std::optional<double> tau = discontinuity(par);

  long long ell = rm.ell;
  double x = rm.w0;
  bool start_tied = false;
  double ratio = v.alpha / v.beta;
  double r_near = std::round(ratio);
  if (r_near >= 1.0 && std::abs(ratio - r_near) <= 1e-9 * std::max(1.0, ratio)) {
    // integer vote ratio: the seat right after the initial run is itself a
    // tie, and floor/frac of the ratio are one rounding error away from
    // flipping; let the policy settle it and flag the affected seats
    start_tied = true;
    if (policy.choose() == Branch::lower) {
      ell = static_cast<long long>(r_near);
      x = 0.0;
    } else {
      ell = static_cast<long long>(r_near) - 1;
      x = 1.0;
    }
  }

  SeatSequence seq;
  auto emit = [&](int who, bool flagged) {
    if (seq.winners.size() >= n_seats) return;
    seq.winners.push_back(who);
    seq.per_step_scores.emplace_back();
    seq.tie_flags.push_back(flagged ? 1 : 0);
  };
  for (long long k = 0; k < ell && seq.winners.size() < n_seats; ++k)
    emit(0, start_tied);
  bool first_block = true;
  while (seq.winners.size() < n_seats) {
    bool at_tau = tau && std::abs(x - *tau) <= tau_eps;
    double next;
    if (at_tau) {
      next = (policy.choose() == Branch::upper) ? step_upper(par, x, tau_eps)
                                                : step_lower(par, x, tau_eps);
    } else {
      next = step_lower(par, x, tau_eps);
    }
    double raw = par.a * x + par.b - next;
    long long eps = std::llround(raw);
    if (std::abs(raw - static_cast<double>(eps)) > 1e-9)
      throw std::logic_error("predicted_seats: symbol defect exceeds 1e-9");
    bool flagged = at_tau || (start_tied && first_block);
    emit(1, flagged);
    for (long long k = 0; k < rm.b0 + 1 + eps; ++k) emit(0, flagged);
    x = next;
    first_block = false;
  }
  return seq;
}

/// Closed-form membership test for the regions where pB is exactly 1/2 or
/// 1/3.  Higher-denominator regions are served by rotation-number queries.
inline bool region_pB(const TwoPartyVotes& v, long long num, long long den) {
  const double al = v.alpha, be = v.beta;
  if (num == 1 && den == 2)
    return al <= 2.0 * be * (1.0 - be) && be <= 2.0 * al * (1.0 - al);
  if (num == 1 && den == 3) {
    if (al < be) return false;
    double poly = al - 2.0 * be - al * al + 2.0 * al * be + 2.0 * be * be -
                  3.0 * al * be * be;
    return poly >= 0.0 && al <= 3.0 * be * (1.0 - be);
  }
  throw std::invalid_argument("region_pB: closed forms exist for 1/2 and 1/3 only");
}

struct StaircaseRow {
  double alpha = 0.0;
  double beta = 0.0;
  double pB_lo = 0.0;
  double pB_hi = 0.0;
  std::string rho_kind;  // "rational" | "enclosure" | "degenerate"
  long long q = 0;       // denominator when rational
};

/// pB over a rectangular (alpha, beta) grid; cells outside the vote simplex
/// or with alpha = beta = 0 are skipped.
inline std::vector<StaircaseRow> staircase(const std::vector<double>& alphas,
                                           const std::vector<double>& betas,
                                           RotationOptions opt = {},
                                           unsigned jobs = 1) {
  struct Cell {
    double alpha, beta;
  };
  std::vector<Cell> cells;
  for (double al : alphas)
    for (double be : betas) {
      if (al < 0 || be < 0 || al + be > 1.0 + 1e-15 || al + be <= 0.0) continue;
      cells.push_back({al, be});
    }
  std::vector<StaircaseRow> rows(cells.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < cells.size(); i += stride) {
      double al = cells[i].alpha, be = cells[i].beta;
      double ga = std::max(0.0, 1.0 - al - be);
      StaircaseRow row;
      row.alpha = al;
      row.beta = be;
      bool flip = al < be;
      TwoPartyVotes v = flip ? TwoPartyVotes(be, al, ga) : TwoPartyVotes(al, be, ga);
      PBPrediction pred = predicted_pB(v, opt);
      row.pB_lo = flip ? 1.0 - pred.pB.hi : pred.pB.lo;
      row.pB_hi = flip ? 1.0 - pred.pB.lo : pred.pB.hi;
      if (pred.rho && pred.rho->is_rational()) {
        row.rho_kind = "rational";
        row.q = pred.rho->rational().q;
      } else if (pred.rho) {
        row.rho_kind = "enclosure";
      } else {
        row.rho_kind = "degenerate";  // beta = 0: no map behind the value
      }
      rows[i] = std::move(row);
    }
  };
  if (jobs <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, jobs);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace circlemap
