// Command-line front door: orbits, rotation numbers, plateau and staircase
// sweeps, invariant-set geometry, measure samples, and the two sequential
// election methods, with CSV/JSON emission.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "circlemap/election.hpp"
#include "circlemap/invariant.hpp"
#include "circlemap/map.hpp"
#include "circlemap/profile_io.hpp"
#include "circlemap/rotation.hpp"
#include "circlemap/thiele_limit.hpp"
#include "circlemap/two_party.hpp"
#include "circlemap/version.hpp"

namespace {

using namespace circlemap;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Single sink for output: --out file (relative paths resolve against
// CIRCLEMAP_OUT_DIR when set), stdout otherwise.
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& out_path) {
    if (out_path.empty()) return;
    std::string path = out_path;
    const char* dir = std::getenv("CIRCLEMAP_OUT_DIR");
    if (dir && *dir && path.find('/') == std::string::npos)
      path = std::string(dir) + "/" + path;
    file = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file) throw std::runtime_error("cannot open output file: " + path);
    os = file.get();
  }
  std::ostream& out() { return *os; }
};

void echo_header(std::ostream& os, const std::string& cmd, const std::string& params,
                 std::uint64_t seed) {
  os << "# circlemap " << version << " " << cmd << "\n";
  os << "# " << params << " seed=" << seed << "\n";
}

BranchPolicy make_policy(const std::string& name, std::uint64_t seed) {
  if (name == "lower") return BranchPolicy::always_lower();
  if (name == "upper") return BranchPolicy::always_upper();
  if (name == "random") return BranchPolicy::seeded(seed);
  throw CLI::ValidationError("--policy", "must be lower|upper|random");
}

std::vector<double> parse_grid(const std::string& spec, const std::string& opt) {
  // "lo:hi:n" or a single value
  std::vector<double> out;
  auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    out.push_back(std::stod(spec));
    return out;
  }
  auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw CLI::ValidationError(opt, "grid must be lo:hi:count or a single number");
  double lo = std::stod(spec.substr(0, c1));
  double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  long n = std::stol(spec.substr(c2 + 1));
  if (n < 1) throw CLI::ValidationError(opt, "grid count must be >= 1");
  for (long i = 0; i < n; ++i)
    out.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
  return out;
}

std::string describe(const RotationNumber& rn) {
  std::ostringstream os;
  if (rn.is_rational()) {
    const auto& r = rn.rational();
    os << "rational " << r.p << "/" << r.q;
    switch (r.side) {
      case PlateauSide::lower_boundary: os << " side=lower_boundary"; break;
      case PlateauSide::interior: os << " side=interior"; break;
      case PlateauSide::upper_boundary: os << " side=upper_boundary"; break;
    }
    if (r.boundary_uncertain) os << " boundary_uncertain=1";
  } else {
    os << "enclosure [" << fmt17(rn.enclosure().lo) << ", "
       << fmt17(rn.enclosure().hi) << "]";
    if (rn.boundary_ambiguous()) os << " boundary_ambiguous=1";
  }
  return os.str();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"piecewise-linear contractive interval maps and sequential seat allocation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every stochastic choice");

  // ---- orbit ----------------------------------------------------------
  auto* orbit_cmd = app.add_subcommand("orbit", "iterate the map and emit points/symbols")->fallthrough();
  double o_a = 0.5, o_b = 0.5, o_x0 = 0.0;
  std::size_t o_n = 20;
  std::string o_policy = "lower", o_out;
  orbit_cmd->add_option("--a", o_a, "slope in (0,1)")->required();
  orbit_cmd->add_option("--b", o_b, "offset in [0,1)")->required();
  orbit_cmd->add_option("--x0", o_x0, "start point in [0,1]");
  orbit_cmd->add_option("--n", o_n, "number of steps");
  orbit_cmd->add_option("--policy", o_policy, "branch choice at the discontinuity: lower|upper|random");
  orbit_cmd->add_option("--out", o_out, "output file (default stdout)");

  // ---- rotnum ---------------------------------------------------------
  auto* rot_cmd = app.add_subcommand("rotnum", "certified rotation number")->fallthrough();
  double r_a = 0.5, r_b = 0.5, r_tol = 1e-12;
  long long r_qmax = 64;
  rot_cmd->add_option("--a", r_a)->required();
  rot_cmd->add_option("--b", r_b)->required();
  rot_cmd->add_option("--qmax", r_qmax, "largest certifiable denominator");
  rot_cmd->add_option("--tol", r_tol, "enclosure width target");

  // ---- plateaus -------------------------------------------------------
  auto* plat_cmd = app.add_subcommand("plateaus", "all rotation plateaus up to a denominator")->fallthrough();
  double p_a = 0.5;
  long long p_qmax = 20;
  unsigned p_jobs = 1;
  std::string p_out;
  plat_cmd->add_option("--a", p_a)->required();
  plat_cmd->add_option("--qmax", p_qmax);
  plat_cmd->add_option("--jobs", p_jobs, "worker threads (rows stay sorted)");
  plat_cmd->add_option("--out", p_out);

  // ---- staircase ------------------------------------------------------
  auto* st_cmd = app.add_subcommand("staircase", "limit seat share of B over a vote grid")->fallthrough();
  std::string st_alpha = "0.05:0.9:18", st_beta = "0.05:0.9:18", st_out;
  unsigned st_jobs = 1;
  long long st_qmax = 64;
  st_cmd->add_option("--alpha", st_alpha, "grid lo:hi:count or single value");
  st_cmd->add_option("--beta", st_beta, "grid lo:hi:count or single value");
  st_cmd->add_option("--qmax", st_qmax);
  st_cmd->add_option("--jobs", st_jobs);
  st_cmd->add_option("--out", st_out);

  // ---- invariant-set --------------------------------------------------
  auto* inv_cmd = app.add_subcommand("invariant-set", "depth-n interval cover of the invariant set")->fallthrough();
  double i_a = 0.5, i_b = 0.5;
  std::size_t i_n = 10;
  std::string i_out;
  inv_cmd->add_option("--a", i_a)->required();
  inv_cmd->add_option("--b", i_b)->required();
  inv_cmd->add_option("--n", i_n, "recursion depth");
  inv_cmd->add_option("--out", i_out);

  // ---- measure --------------------------------------------------------
  auto* me_cmd = app.add_subcommand("measure", "invariant-measure samples")->fallthrough();
  double m_a = 0.5, m_b = 0.5, m_x0 = 0.0;
  std::size_t m_n = 1000;
  std::string m_kind = "empirical", m_policy = "lower", m_out;
  me_cmd->add_option("--a", m_a)->required();
  me_cmd->add_option("--b", m_b)->required();
  me_cmd->add_option("--kind", m_kind, "empirical|pushforward");
  me_cmd->add_option("--n", m_n, "points (orbit length or grid size)");
  me_cmd->add_option("--x0", m_x0);
  me_cmd->add_option("--policy", m_policy);
  me_cmd->add_option("--out", m_out);

  // ---- elect ----------------------------------------------------------
  auto* el_cmd = app.add_subcommand("elect", "sequential seat allocation from a profile file")->fallthrough();
  std::string el_method = "phragmen", el_profile, el_tie = "lowest", el_out;
  std::size_t el_seats = 10;
  el_cmd->add_option("--method", el_method, "phragmen|phragmen-power|thiele");
  el_cmd->add_option("--profile", el_profile, "profile JSON file")->required();
  el_cmd->add_option("--seats", el_seats);
  el_cmd->add_option("--tiebreak", el_tie, "lowest|lot");
  el_cmd->add_option("--out", el_out);

  // ---- two-party ------------------------------------------------------
  auto* tp_cmd = app.add_subcommand("two-party", "closed-form two-party analysis and prediction")->fallthrough();
  double t_alpha = 0.4, t_beta = 0.3;
  std::optional<double> t_gamma;
  std::size_t t_seats = 0;
  std::string t_out;
  tp_cmd->add_option("--alpha", t_alpha)->required();
  tp_cmd->add_option("--beta", t_beta)->required();
  tp_cmd->add_option("--gamma", t_gamma, "defaults to 1 - alpha - beta");
  tp_cmd->add_option("--seats", t_seats, "also emit a predicted seat sequence");
  tp_cmd->add_option("--out", t_out);

  // ---- thiele-limit ---------------------------------------------------
  auto* tl_cmd = app.add_subcommand("thiele-limit", "asymptotic seat shares for harmonic discounting")->fallthrough();
  std::string tl_profile, tl_out;
  tl_cmd->add_option("--profile", tl_profile)->required();
  tl_cmd->add_option("--out", tl_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
    return 2;
  }

  if (orbit_cmd->parsed()) {
    Sink sink(o_out);
    MapParams par(o_a, o_b);
    Orbit o = orbit(par, o_x0, o_n, make_policy(o_policy, seed));
    echo_header(sink.out(), "orbit",
                "a=" + fmt17(o_a) + " b=" + fmt17(o_b) + " x0=" + fmt17(o_x0) +
                    " n=" + std::to_string(o_n) + " policy=" + o_policy,
                seed);
    sink.out() << "step,x,eps\n";
    for (std::size_t i = 0; i < o.points.size(); ++i) {
      sink.out() << i << "," << fmt17(o.points[i]) << ",";
      if (i < o.symbols.size()) sink.out() << o.symbols[i];
      sink.out() << "\n";
    }
    return 0;
  }

  if (rot_cmd->parsed()) {
    MapParams par(r_a, r_b);
    RotationNumber rn = rotation_number(par, RotationOptions{r_qmax, r_tol});
    echo_header(std::cout, "rotnum",
                "a=" + fmt17(r_a) + " b=" + fmt17(r_b) + " qmax=" + std::to_string(r_qmax),
                seed);
    std::cout << "rho = " << describe(rn) << "\n";
    return 0;
  }

  if (plat_cmd->parsed()) {
    Sink sink(p_out);
    PlateauSweep sw = plateau_sweep(p_a, p_qmax, p_jobs);
    echo_header(sink.out(), "plateaus",
                "a=" + fmt17(p_a) + " qmax=" + std::to_string(p_qmax) +
                    " jobs=" + std::to_string(p_jobs),
                seed);
    sink.out() << "p,q,b_minus_lo,b_minus_hi,b_plus_lo,b_plus_hi\n";
    for (const auto& pl : sw.plateaus)
      sink.out() << pl.p << "," << pl.q << "," << fmt17(pl.b_minus.lo) << ","
                 << fmt17(pl.b_minus.hi) << "," << fmt17(pl.b_plus.lo) << ","
                 << fmt17(pl.b_plus.hi) << "\n";
    sink.out() << "# total_length=" << fmt17(sw.total_length)
               << " lower_bound=" << fmt17(sw.lower_bound) << "\n";
    return 0;
  }

  if (st_cmd->parsed()) {
    Sink sink(st_out);
    auto alphas = parse_grid(st_alpha, "--alpha");
    auto betas = parse_grid(st_beta, "--beta");
    auto rows = staircase(alphas, betas, RotationOptions{st_qmax, 1e-12}, st_jobs);
    echo_header(sink.out(), "staircase",
                "alpha=" + st_alpha + " beta=" + st_beta + " qmax=" +
                    std::to_string(st_qmax) + " jobs=" + std::to_string(st_jobs),
                seed);
    sink.out() << "alpha,beta,pB_lo,pB_hi,rho_kind,q\n";
    for (const auto& r : rows)
      sink.out() << fmt17(r.alpha) << "," << fmt17(r.beta) << "," << fmt17(r.pB_lo)
                 << "," << fmt17(r.pB_hi) << "," << r.rho_kind << "," << r.q << "\n";
    return 0;
  }

  if (inv_cmd->parsed()) {
    Sink sink(i_out);
    MapParams par(i_a, i_b);
    IntervalUnion u = invariant_intervals(par, i_n);
    echo_header(sink.out(), "invariant-set",
                "a=" + fmt17(i_a) + " b=" + fmt17(i_b) + " n=" + std::to_string(i_n),
                seed);
    sink.out() << "lo,hi\n";
    for (const auto& [lo, hi] : u.intervals)
      sink.out() << fmt17(lo) << "," << fmt17(hi) << "\n";
    sink.out() << "# count=" << u.intervals.size()
               << " total_length=" << fmt17(u.total_length()) << "\n";
    return 0;
  }

  if (me_cmd->parsed()) {
    Sink sink(m_out);
    MapParams par(m_a, m_b);
    echo_header(sink.out(), "measure",
                "a=" + fmt17(m_a) + " b=" + fmt17(m_b) + " kind=" + m_kind +
                    " n=" + std::to_string(m_n),
                seed);
    if (m_kind == "empirical") {
      write_csv(empirical_measure(par, m_x0, m_n, make_policy(m_policy, seed)), sink.out());
    } else if (m_kind == "pushforward") {
      RotationNumber rn = rotation_number(par);
      write_csv(pushforward_measure(par, rn, m_n, 1e-10), sink.out());
    } else {
      throw CLI::ValidationError("--kind", "must be empirical|pushforward");
    }
    return 0;
  }

  if (el_cmd->parsed()) {
    Sink sink(el_out);
    BallotProfile prof = load_profile(el_profile);
    Method m;
    if (el_method == "phragmen" || el_method == "phragmen-reduced")
      m = Method::phragmen_reduced;
    else if (el_method == "phragmen-power")
      m = Method::phragmen_power;
    else if (el_method == "thiele")
      m = Method::thiele;
    else
      throw CLI::ValidationError("--method", "must be phragmen|phragmen-power|thiele");
    TieBreak tb = (el_tie == "lot") ? TieBreak::seeded_lot(seed) : TieBreak::lowest_index();
    if (el_tie != "lot" && el_tie != "lowest")
      throw CLI::ValidationError("--tiebreak", "must be lowest|lot");
    SeatSequence seq = run(m, prof, el_seats, std::move(tb));
    echo_header(sink.out(), "elect",
                "method=" + el_method + " profile=" + el_profile + " seats=" +
                    std::to_string(el_seats) + " tiebreak=" + el_tie,
                seed);
    write_csv(seq, prof, sink.out());
    std::string winners;
    for (int w : seq.winners) winners += prof.names[w];
    sink.out() << "# winners=" << winners << "\n";
    return 0;
  }

  if (tp_cmd->parsed()) {
    Sink sink(t_out);
    double gamma = t_gamma ? *t_gamma : 1.0 - t_alpha - t_beta;
    TwoPartyVotes v(t_alpha, t_beta, gamma);
    echo_header(sink.out(), "two-party",
                "alpha=" + fmt17(t_alpha) + " beta=" + fmt17(t_beta) +
                    " gamma=" + fmt17(gamma),
                seed);
    bool flip = t_alpha < t_beta;
    PBPrediction pred = predicted_pB(flip ? v.swapped() : v);
    double lo = flip ? 1.0 - pred.pB.hi : pred.pB.lo;
    double hi = flip ? 1.0 - pred.pB.lo : pred.pB.hi;
    sink.out() << "pB_lo=" << fmt17(lo) << " pB_hi=" << fmt17(hi) << "\n";
    if (pred.b0) sink.out() << "b0=" << *pred.b0 << "\n";
    if (pred.rho) sink.out() << "rho = " << describe(*pred.rho) << "\n";
    if (t_seats > 0) {
      SeatSequence seq = predicted_seats(flip ? v.swapped() : v, t_seats,
                                         make_policy("lower", seed));
      std::string names = flip ? "BA" : "AB";
      std::string s;
      for (int w : seq.winners) s += names[w];
      sink.out() << "predicted=" << s << "\n";
    }
    return 0;
  }

  if (tl_cmd->parsed()) {
    Sink sink(tl_out);
    BallotProfile prof = load_profile(tl_profile);
    LimitResult res = solve_limit(prof);
    echo_header(sink.out(), "thiele-limit", "profile=" + tl_profile, seed);
    sink.out() << "point =";
    for (double x : res.point) sink.out() << " " << fmt17(x);
    sink.out() << "\nsupport =";
    for (int i : res.support) sink.out() << " " << prof.names[i];
    sink.out() << "\nobjective = " << fmt17(res.objective)
               << "\nresidual = " << fmt17(res.residual) << "\nuniqueness = ";
    switch (res.unique) {
      case Uniqueness::unique: sink.out() << "unique"; break;
      case Uniqueness::flat_directions: sink.out() << "flat_directions"; break;
      case Uniqueness::unknown: sink.out() << "unknown"; break;
    }
    sink.out() << "\n";
    for (const auto& dir : res.flat_basis) {
      sink.out() << "flat =";
      for (double d : dir) sink.out() << " " << fmt17(d);
      sink.out() << "\n";
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
