#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "circlemap/election.hpp"

namespace circlemap {

/// Concave share objective: sum over weighted ballot sets of v_sigma log
/// x_sigma with x_sigma the summed shares of the set; -infinity marks a
/// weighted set with zero total share.
inline double objective(const BallotProfile& p, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& [mask, w] : p.votes) {
    double xs = 0.0;
    for (int i = 0; i < p.num_parties; ++i)
      if (party_in(mask, i)) xs += x[i];
    if (xs <= 0.0) return -std::numeric_limits<double>::infinity();
    s += w * std::log(xs);
  }
  return s;
}

/// partial derivatives sum_{sigma ni i} v_sigma / x_sigma; +inf components
/// where a weighted set containing i has zero share
inline std::vector<double> gradient(const BallotProfile& p, const std::vector<double>& x) {
  std::vector<double> g(p.num_parties, 0.0);
  for (const auto& [mask, w] : p.votes) {
    double xs = 0.0;
    for (int i = 0; i < p.num_parties; ++i)
      if (party_in(mask, i)) xs += x[i];
    for (int i = 0; i < p.num_parties; ++i) {
      if (!party_in(mask, i)) continue;
      if (xs <= 0.0)
        g[i] = std::numeric_limits<double>::infinity();
      else if (std::isfinite(g[i]))
        g[i] += w / xs;
    }
  }
  return g;
}

/// in-simplex directional derivatives d*_i = d_i - sum_j x_j d_j; the second
/// term collapses to the total weight of sets with positive share
inline std::vector<double> directional_derivatives(const BallotProfile& p,
                                                   const std::vector<double>& x) {
  std::vector<double> g = gradient(p, x);
  double covered = 0.0;
  for (const auto& [mask, w] : p.votes) {
    double xs = 0.0;
    for (int i = 0; i < p.num_parties; ++i)
      if (party_in(mask, i)) xs += x[i];
    if (xs > 0.0) covered += w;
  }
  for (double& gi : g)
    if (std::isfinite(gi)) gi -= covered;
  return g;
}

enum class Uniqueness { unique, flat_directions, unknown };

struct LimitResult {
  std::vector<double> point;
  std::vector<int> support;  // parties with positive share, ascending
  double objective = 0.0;
  double residual = 0.0;  // max_i |d_i psi - V| / V over the support
  Uniqueness unique = Uniqueness::unknown;
  std::vector<std::vector<double>> flat_basis;  // directions spanning the flat set
};

namespace detail {

inline bool solve_linear(std::vector<std::vector<double>> A, std::vector<double> rhs,
                         std::vector<double>& out) {
  const int n = static_cast<int>(rhs.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-13) return false;
    std::swap(A[piv], A[c]);
    std::swap(rhs[piv], rhs[c]);
    for (int r = c + 1; r < n; ++r) {
      double f = A[r][c] / A[c][c];
      for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  out.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < n; ++k) s -= A[r][k] * out[k];
    out[r] = s / A[r][r];
  }
  return true;
}

// cyclic Jacobi eigendecomposition for small symmetric matrices
inline void jacobi_eigen(std::vector<std::vector<double>> A, std::vector<double>& vals,
                         std::vector<std::vector<double>>& vecs) {
  const int n = static_cast<int>(A.size());
  vecs.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) vecs[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A[i][j] * A[i][j];
    if (off < 1e-28) break;
    for (int pq = 0; pq < n; ++pq)
      for (int q = pq + 1; q < n; ++q) {
        int p = pq;
        if (std::abs(A[p][q]) < 1e-300) continue;
        double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = vecs[k][p], vkq = vecs[k][q];
          vecs[k][p] = c * vkp - s * vkq;
          vecs[k][q] = s * vkp + c * vkq;
        }
      }
  }
  vals.resize(n);
  for (int i = 0; i < n; ++i) vals[i] = A[i][i];
}

struct FaceSolution {
  bool ok = false;
  std::vector<double> x;  // full share vector
  double objective = -std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
};

// Newton ascent of the objective on the relative interior of the face with
// the given support; starts at the face barycenter.  The objective need not
// attain its supremum on an open face, so non-convergence is a normal
// outcome and simply rejects the face.
inline FaceSolution solve_face(const BallotProfile& prof, const std::vector<int>& idx) {
  FaceSolution sol;
  const int N = prof.num_parties;
  const int k = static_cast<int>(idx.size());
  PartySet face_mask = 0;
  for (int i : idx) face_mask |= (1u << i);
  for (const auto& [mask, w] : prof.votes)
    if ((mask & face_mask) == 0) return sol;  // objective is -inf on this face
  const double V = prof.total_weight();

  std::vector<double> x(N, 0.0);
  for (int i : idx) x[i] = 1.0 / static_cast<double>(k);

  auto residual_at = [&](const std::vector<double>& xx) {
    std::vector<double> g = gradient(prof, xx);
    double r = 0.0;
    for (int i : idx) r = std::max(r, std::abs(g[i] - V));
    return r / V;
  };

  if (k == 1) {
    sol.ok = true;
    sol.x = x;
    sol.objective = objective(prof, x);
    sol.residual = residual_at(x);
    return sol;
  }

  double fx = objective(prof, x);
  double res = residual_at(x);
  std::vector<double> x_best = x;
  double res_best = res;
  for (int it = 0; it < 400; ++it) {
    if (res < 1e-13) break;
    std::vector<double> g = gradient(prof, x);

    // reduced gradient/Hessian with x[idx[k-1]] eliminated
    const int last = idx[k - 1];
    std::vector<double> gr(k - 1);
    for (int j = 0; j < k - 1; ++j) gr[j] = g[idx[j]] - g[last];
    std::vector<std::vector<double>> H(k, std::vector<double>(k, 0.0));
    for (const auto& [mask, w] : prof.votes) {
      double xs = 0.0;
      for (int i = 0; i < N; ++i)
        if (party_in(mask, i)) xs += x[i];
      double c = -w / (xs * xs);
      for (int a = 0; a < k; ++a) {
        if (!party_in(mask, idx[a])) continue;
        for (int b = 0; b < k; ++b)
          if (party_in(mask, idx[b])) H[a][b] += c;
      }
    }
    std::vector<std::vector<double>> Hr(k - 1, std::vector<double>(k - 1));
    for (int a = 0; a < k - 1; ++a)
      for (int b = 0; b < k - 1; ++b)
        Hr[a][b] = H[a][b] - H[a][k - 1] - H[k - 1][b] + H[k - 1][k - 1];

    std::vector<double> d;
    bool newton = solve_linear(Hr, gr, d);
    if (newton)
      for (double& di : d) di = -di;
    double ascent = 0.0;
    if (newton)
      for (int j = 0; j < k - 1; ++j) ascent += d[j] * gr[j];
    if (!newton || !(ascent > 0.0)) {
      d = gr;  // gradient fallback, rescaled to a sane step
      double norm = 0.0;
      for (double v : d) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0) {
        for (double& v : d) v /= std::max(norm, V);
      }
    }

    // accept on clear objective progress or on residual progress; near the
    // optimum the objective gap drops below double rounding long before the
    // gradient does
    double t = 1.0;
    bool moved = false;
    while (t > 1e-18) {
      std::vector<double> xt = x;
      double sum_head = 0.0;
      bool feasible = true;
      for (int j = 0; j < k - 1; ++j) {
        xt[idx[j]] = x[idx[j]] + t * d[j];
        if (xt[idx[j]] <= 1e-14) feasible = false;
        sum_head += xt[idx[j]];
      }
      xt[last] = 1.0 - sum_head;
      if (xt[last] <= 1e-14) feasible = false;
      if (feasible) {
        double ft = objective(prof, xt);
        double rt = residual_at(xt);
        if (ft >= fx + 1e-13 * (1.0 + std::abs(fx)) || rt < res) {
          x = std::move(xt);
          fx = ft;
          res = rt;
          if (res < res_best) {
            res_best = res;
            x_best = x;
          }
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
  }

  sol.residual = res_best;
  sol.ok = sol.residual <= 1e-8;
  sol.x = x_best;
  sol.objective = objective(prof, x_best);
  return sol;
}

inline void orthonormalize(std::vector<std::vector<double>>& basis) {
  std::vector<std::vector<double>> out;
  for (auto v : basis) {
    for (const auto& u : out) {
      double d = std::inner_product(v.begin(), v.end(), u.begin(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * u[i];
    }
    double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (n > 1e-10) {
      for (double& vi : v) vi /= n;
      out.push_back(std::move(v));
    }
  }
  basis = std::move(out);
}

}  // namespace detail

/// Maximizer of the share objective over the simplex, by enumerating support
/// faces and running damped Newton on each; exact for up to 12 parties, a
/// projected-ascent pre-solve picks candidate supports beyond that.
inline LimitResult solve_limit(const BallotProfile& prof) {
  const int N = prof.num_parties;
  const double V = prof.total_weight();

  std::vector<PartySet> faces;
  if (N <= 12) {
    for (PartySet S = 1; S < (1u << N); ++S) faces.push_back(S);
  } else {
    // projected gradient ascent to guess the support, then its neighborhood
    std::vector<double> x(N, 1.0 / N);
    for (int it = 0; it < 20000; ++it) {
      std::vector<double> g = directional_derivatives(prof, x);
      double step = 1e-2 / V;
      double sum = 0.0;
      for (int i = 0; i < N; ++i) {
        double gi = std::isfinite(g[i]) ? g[i] : V;
        x[i] = std::max(0.0, x[i] + step * x[i] * gi);
        sum += x[i];
      }
      for (int i = 0; i < N; ++i) x[i] /= sum;
    }
    PartySet S = 0;
    for (int i = 0; i < N; ++i)
      if (x[i] > 1e-7) S |= (1u << i);
    faces.push_back(S);
    faces.push_back((1u << N) - 1u);
    for (int i = 0; i < N; ++i)
      if (party_in(S, i) && S != (1u << i)) faces.push_back(S & ~(1u << i));
  }

  bool have = false;
  detail::FaceSolution best;
  std::vector<int> best_idx;
  for (PartySet S : faces) {
    std::vector<int> idx;
    for (int i = 0; i < N; ++i)
      if (party_in(S, i)) idx.push_back(i);
    detail::FaceSolution fs = detail::solve_face(prof, idx);
    if (!fs.ok) continue;
    if (!have) {
      best = fs;
      best_idx = idx;
      have = true;
      continue;
    }
    double tol = 1e-12 * std::max(1.0, std::abs(best.objective));
    bool better = fs.objective > best.objective + tol;
    bool equal = std::abs(fs.objective - best.objective) <= tol;
    // among ties prefer the largest support: the flat set's relative
    // interior lives there, and that is where flat directions are visible
    if (better || (equal && (idx.size() > best_idx.size() ||
                             (idx.size() == best_idx.size() && idx < best_idx)))) {
      best = fs;
      best_idx = idx;
    }
  }
  if (!have)
    throw std::runtime_error("solve_limit: no face admitted a stationary point");

  LimitResult res;
  res.point = best.x;
  res.support = best_idx;
  res.objective = best.objective;
  res.residual = best.residual;

  const int k = static_cast<int>(best_idx.size());
  std::vector<std::vector<double>> flat;
  bool negdef = true;
  if (k >= 2) {
    std::vector<std::vector<double>> H(k, std::vector<double>(k, 0.0));
    for (const auto& [mask, w] : prof.votes) {
      double xs = 0.0;
      for (int i = 0; i < N; ++i)
        if (party_in(mask, i)) xs += best.x[i];
      double c = -w / (xs * xs);
      for (int a = 0; a < k; ++a) {
        if (!party_in(mask, best_idx[a])) continue;
        for (int b = 0; b < k; ++b)
          if (party_in(mask, best_idx[b])) H[a][b] += c;
      }
    }
    std::vector<std::vector<double>> Hr(k - 1, std::vector<double>(k - 1));
    for (int a = 0; a < k - 1; ++a)
      for (int b = 0; b < k - 1; ++b)
        Hr[a][b] = H[a][b] - H[a][k - 1] - H[k - 1][b] + H[k - 1][k - 1];
    std::vector<double> vals;
    std::vector<std::vector<double>> vecs;
    detail::jacobi_eigen(Hr, vals, vecs);
    for (int j = 0; j < k - 1; ++j) {
      if (vals[j] > -1e-8) {
        negdef = false;
        std::vector<double> dir(N, 0.0);
        double tail = 0.0;
        for (int a = 0; a < k - 1; ++a) {
          dir[best_idx[a]] = vecs[a][j];
          tail += vecs[a][j];
        }
        dir[best_idx[k - 1]] = -tail;
        flat.push_back(std::move(dir));
      }
    }
    detail::orthonormalize(flat);
  }

  bool boundary_strict = true;
  if (k < N) {
    std::vector<double> ds = directional_derivatives(prof, best.x);
    for (int j = 0; j < N; ++j) {
      bool in_support =
          std::find(best_idx.begin(), best_idx.end(), j) != best_idx.end();
      if (!in_support && !(ds[j] < -1e-8 * std::max(1.0, V))) boundary_strict = false;
    }
  }

  if (!negdef) {
    res.unique = Uniqueness::flat_directions;
    res.flat_basis = std::move(flat);
  } else if (boundary_strict) {
    res.unique = Uniqueness::unique;
  } else {
    res.unique = Uniqueness::unknown;
  }
  return res;
}

struct BlockResult {
  std::vector<int> parties;  // original indices, ascending
  double weight = 0.0;       // block share of the total vote
  LimitResult inner;         // limit of the block-restricted election
};

/// Partition into ballot-connected components; the global limit factors as
/// x_i = (block weight) * (in-block share).
inline std::vector<BlockResult> block_decompose(const BallotProfile& prof) {
  const int N = prof.num_parties;
  std::vector<int> parent(N);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& [mask, w] : prof.votes) {
    int first = -1;
    for (int i = 0; i < N; ++i) {
      if (!party_in(mask, i)) continue;
      if (first < 0)
        first = i;
      else
        parent[find(i)] = find(first);
    }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> root_to_block(N, -1);
  for (int i = 0; i < N; ++i) {
    int r = find(i);
    if (root_to_block[r] < 0) {
      root_to_block[r] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[root_to_block[r]].push_back(i);
  }
  const double V = prof.total_weight();
  std::vector<BlockResult> out;
  for (const auto& members : blocks) {
    BlockResult br;
    br.parties = members;
    std::vector<int> local(N, -1);
    PartySet bm = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      local[members[k]] = static_cast<int>(k);
      bm |= (1u << members[k]);
    }
    std::vector<std::pair<PartySet, double>> raw;
    std::vector<std::string> names;
    for (int i : members) names.push_back(prof.names[i]);
    double w_block = 0.0;
    for (const auto& [mask, w] : prof.votes) {
      if ((mask & bm) == 0) continue;
      PartySet sub = 0;
      for (int i : members)
        if (party_in(mask, i)) sub |= (1u << local[i]);
      raw.emplace_back(sub, w);
      w_block += w;
    }
    br.weight = w_block / V;
    br.inner = solve_limit(BallotProfile(static_cast<int>(members.size()), std::move(raw),
                                         std::move(names)));
    out.push_back(std::move(br));
  }
  return out;
}

struct SimulationComparison {
  LimitResult limit;
  SimplexPoint shares;
  double distance = 0.0;
};

/// Runs the harmonic-discount election and reports the Euclidean distance
/// from the simulated shares to the limit point (flat directions, when
/// present, are projected out so the distance is to the whole flat set).
inline SimulationComparison compare_with_simulation(const BallotProfile& prof,
                                                    std::size_t n_seats, TieBreak tb) {
  SimulationComparison out;
  out.limit = solve_limit(prof);
  SeatSequence seq = run(Method::thiele, prof, n_seats, std::move(tb));
  out.shares = seat_shares(seq, prof.num_parties, n_seats);
  std::vector<double> d(prof.num_parties);
  for (int i = 0; i < prof.num_parties; ++i)
    d[i] = out.shares.x[i] - out.limit.point[i];
  for (const auto& u : out.limit.flat_basis) {
    double proj = std::inner_product(d.begin(), d.end(), u.begin(), 0.0);
    for (int i = 0; i < prof.num_parties; ++i) d[i] -= proj * u[i];
  }
  out.distance = std::sqrt(std::inner_product(d.begin(), d.end(), d.begin(), 0.0));
  return out;
}

}  // namespace circlemap
