#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace circlemap {

using PartySet = std::uint32_t;  // bit i set <=> party i in the ballot set
constexpr int max_parties = 20;

inline bool party_in(PartySet s, int i) { return (s >> i) & 1u; }

/// Vote weights indexed by nonempty party subsets, in canonical form:
/// subsets sorted by bitmask, duplicates merged by weight addition,
/// zero-weight entries dropped.  Every party must collect positive weight.
struct BallotProfile {
  int num_parties = 0;
  std::vector<std::string> names;
  std::vector<std::pair<PartySet, double>> votes;

  BallotProfile() = default;

  BallotProfile(int n, std::vector<std::pair<PartySet, double>> raw,
                std::vector<std::string> party_names = {}) {
    if (n < 1 || n > max_parties)
      throw std::invalid_argument("BallotProfile: need between 1 and 20 parties");
    num_parties = n;
    if (party_names.empty()) {
      for (int i = 0; i < n; ++i) names.push_back(std::string(1, char('A' + i)));
    } else {
      if (static_cast<int>(party_names.size()) != n)
        throw std::invalid_argument("BallotProfile: names/size mismatch");
      names = std::move(party_names);
    }
    const PartySet all = (1u << n) - 1u;
    std::sort(raw.begin(), raw.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [mask, w] : raw) {
      if (mask == 0) throw std::invalid_argument("BallotProfile: empty ballot set");
      if ((mask & ~all) != 0)
        throw std::invalid_argument("BallotProfile: ballot names unknown party");
      if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument("BallotProfile: weights must be finite and >= 0");
      if (w == 0.0) continue;
      if (!votes.empty() && votes.back().first == mask)
        votes.back().second += w;
      else
        votes.emplace_back(mask, w);
    }
    if (votes.empty()) throw std::invalid_argument("BallotProfile: no positive weight");
    for (int i = 0; i < n; ++i)
      if (party_weight(i) <= 0.0)
        throw std::invalid_argument("BallotProfile: party '" + names[i] +
                                    "' appears on no weighted ballot");
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto& [m, w] : votes) s += w;
    return s;
  }

  // W-bar_i: total weight of ballots naming party i
  double party_weight(int i) const {
    double s = 0.0;
    for (const auto& [m, w] : votes)
      if (party_in(m, i)) s += w;
    return s;
  }

  BallotProfile scaled(double c) const {
    BallotProfile p(*this);
    for (auto& [m, w] : p.votes) w *= c;
    return p;
  }

  // normalization is explicit, never applied behind the caller's back
  BallotProfile normalized() const { return scaled(1.0 / total_weight()); }
};

/// Deterministic tie resolution among the set of tied parties.
class TieBreak {
 public:
  enum class Kind { lowest_index, seeded_lot, scripted };

  static TieBreak lowest_index() { return TieBreak(Kind::lowest_index); }
  static TieBreak seeded_lot(std::uint64_t seed) {
    TieBreak t(Kind::seeded_lot);
    t.rng_.seed(seed);
    return t;
  }
  static TieBreak scripted(std::vector<int> picks) {
    TieBreak t(Kind::scripted);
    t.script_ = std::move(picks);
    return t;
  }

  Kind kind() const { return kind_; }

  int pick(const std::vector<int>& tied) {
    if (tied.empty()) throw std::logic_error("TieBreak: empty tie set");
    switch (kind_) {
      case Kind::lowest_index:
        return tied.front();
      case Kind::seeded_lot:
        return tied[static_cast<std::size_t>(rng_() % tied.size())];
      case Kind::scripted: {
        if (cursor_ >= script_.size())
          throw std::runtime_error("TieBreak: scripted picks exhausted");
        int want = script_[cursor_++];
        if (std::find(tied.begin(), tied.end(), want) == tied.end())
          throw std::runtime_error("TieBreak: scripted pick not among tied parties");
        return want;
      }
    }
    throw std::logic_error("TieBreak: bad kind");
  }

 private:
  explicit TieBreak(Kind k) : kind_(k) {}
  Kind kind_;
  std::mt19937_64 rng_;
  std::vector<int> script_;
  std::size_t cursor_ = 0;
};

constexpr double tie_rel_tol = 1e-9;

struct StepOutcome {
  int winner = -1;
  bool tie = false;
  std::vector<double> scores;
};

namespace detail {

inline std::vector<int> tied_set(const std::vector<double>& score, bool minimize) {
  double best = minimize ? *std::min_element(score.begin(), score.end())
                         : *std::max_element(score.begin(), score.end());
  double slack = tie_rel_tol * std::max(1.0, std::abs(best));
  std::vector<int> tied;
  for (int i = 0; i < static_cast<int>(score.size()); ++i) {
    if (minimize ? (score[i] <= best + slack) : (score[i] >= best - slack))
      tied.push_back(i);
  }
  return tied;
}

}  // namespace detail

/// Free voting power per ballot type; in-range iff every party's reachable
/// power V_i stays <= 1.
struct PhragmenPowerState {
  std::vector<double> free_power;  // aligned with profile.votes
  std::vector<long long> seats;
};

inline PhragmenPowerState make_power_state(const BallotProfile& p) {
  return PhragmenPowerState{std::vector<double>(p.votes.size(), 0.0),
                            std::vector<long long>(p.num_parties, 0)};
}

/// One seat by the voting-power rule: each ballot's power grows uniformly
/// until some party can pay 1; electing it freezes the contributing power.
inline StepOutcome phragmen_step_power(const BallotProfile& p, PhragmenPowerState& st,
                                       TieBreak& tb) {
  const int N = p.num_parties;
  StepOutcome out;
  out.scores.resize(N);
  for (int i = 0; i < N; ++i) {
    double Wbar = 0.0, Vi = 0.0;
    for (std::size_t k = 0; k < p.votes.size(); ++k) {
      if (party_in(p.votes[k].first, i)) {
        Wbar += p.votes[k].second;
        Vi += p.votes[k].second * st.free_power[k];
      }
    }
    if (Vi > 1.0 + 1e-9)
      throw std::invalid_argument("phragmen_step_power: state outside the feasible set");
    out.scores[i] = (1.0 - Vi) / Wbar;  // power increment this party still needs
  }
  std::vector<int> tied = detail::tied_set(out.scores, /*minimize*/ true);
  out.tie = tied.size() > 1;
  out.winner = tb.pick(tied);
  double delta = out.scores[out.winner];
  for (std::size_t k = 0; k < p.votes.size(); ++k) {
    if (party_in(p.votes[k].first, out.winner))
      st.free_power[k] = 0.0;
    else
      st.free_power[k] += delta;
  }
  st.seats[out.winner] += 1;
  return out;
}

/// Place numbers per ballot type; their sum equals the seats handed out.
struct PhragmenReducedState {
  std::vector<double> place_numbers;
  std::vector<long long> seats;
};

inline PhragmenReducedState make_reduced_state(const BallotProfile& p) {
  return PhragmenReducedState{std::vector<double>(p.votes.size(), 0.0),
                              std::vector<long long>(p.num_parties, 0)};
}

/// One seat by the reduced-vote rule W_i = (sum of votes naming i) /
/// (1 + their accumulated place numbers); equivalent to the power rule.
inline StepOutcome phragmen_step_reduced(const BallotProfile& p,
                                         PhragmenReducedState& st, TieBreak& tb) {
  const int N = p.num_parties;
  StepOutcome out;
  out.scores.resize(N);
  for (int i = 0; i < N; ++i) {
    double Wbar = 0.0, Qi = 0.0;
    for (std::size_t k = 0; k < p.votes.size(); ++k) {
      if (party_in(p.votes[k].first, i)) {
        Wbar += p.votes[k].second;
        Qi += st.place_numbers[k];
      }
    }
    out.scores[i] = Wbar / (1.0 + Qi);
  }
  std::vector<int> tied = detail::tied_set(out.scores, /*minimize*/ false);
  out.tie = tied.size() > 1;
  out.winner = tb.pick(tied);
  double Wwin = out.scores[out.winner];
  for (std::size_t k = 0; k < p.votes.size(); ++k)
    if (party_in(p.votes[k].first, out.winner))
      st.place_numbers[k] = p.votes[k].second / Wwin;
  st.seats[out.winner] += 1;
  return out;
}

/// Seats so far among the parties of each ballot type (with repetition).
struct ThieleState {
  std::vector<long long> counts;
  std::vector<long long> seats;
};

inline ThieleState make_thiele_state(const BallotProfile& p) {
  return ThieleState{std::vector<long long>(p.votes.size(), 0),
                     std::vector<long long>(p.num_parties, 0)};
}

/// One seat by harmonic vote discounting: a ballot counts v/(1+s) when s of
/// its parties' seats are already filled.
inline StepOutcome thiele_step(const BallotProfile& p, ThieleState& st, TieBreak& tb) {
  const int N = p.num_parties;
  StepOutcome out;
  out.scores.resize(N);
  for (int i = 0; i < N; ++i) {
    double Wi = 0.0;
    for (std::size_t k = 0; k < p.votes.size(); ++k)
      if (party_in(p.votes[k].first, i))
        Wi += p.votes[k].second / (1.0 + static_cast<double>(st.counts[k]));
    out.scores[i] = Wi;
  }
  std::vector<int> tied = detail::tied_set(out.scores, /*minimize*/ false);
  out.tie = tied.size() > 1;
  out.winner = tb.pick(tied);
  for (std::size_t k = 0; k < p.votes.size(); ++k)
    if (party_in(p.votes[k].first, out.winner)) st.counts[k] += 1;
  st.seats[out.winner] += 1;
  return out;
}

enum class Method { phragmen_power, phragmen_reduced, thiele };

struct SeatSequence {
  std::vector<int> winners;
  std::vector<std::vector<double>> per_step_scores;
  std::vector<char> tie_flags;

  bool any_tie() const {
    return std::find(tie_flags.begin(), tie_flags.end(), char(1)) != tie_flags.end();
  }

  std::vector<long long> counts(int num_parties, std::size_t prefix) const {
    if (prefix > winners.size())
      throw std::invalid_argument("SeatSequence::counts: prefix too long");
    std::vector<long long> c(num_parties, 0);
    for (std::size_t i = 0; i < prefix; ++i) c[winners[i]] += 1;
    return c;
  }
};

inline SeatSequence run(Method m, const BallotProfile& p, std::size_t n_seats,
                        TieBreak tb) {
  if (n_seats < 1) throw std::invalid_argument("run: n_seats must be >= 1");
  SeatSequence seq;
  seq.winners.reserve(n_seats);
  seq.per_step_scores.reserve(n_seats);
  seq.tie_flags.reserve(n_seats);
  PhragmenPowerState ps;
  PhragmenReducedState rs;
  ThieleState ts;
  switch (m) {
    case Method::phragmen_power: ps = make_power_state(p); break;
    case Method::phragmen_reduced: rs = make_reduced_state(p); break;
    case Method::thiele: ts = make_thiele_state(p); break;
  }
  for (std::size_t s = 0; s < n_seats; ++s) {
    StepOutcome o;
    switch (m) {
      case Method::phragmen_power: o = phragmen_step_power(p, ps, tb); break;
      case Method::phragmen_reduced: o = phragmen_step_reduced(p, rs, tb); break;
      case Method::thiele: o = thiele_step(p, ts, tb); break;
    }
    seq.winners.push_back(o.winner);
    seq.per_step_scores.push_back(std::move(o.scores));
    seq.tie_flags.push_back(o.tie ? 1 : 0);
  }
  return seq;
}

/// Nonnegative share vector summing to 1.
struct SimplexPoint {
  std::vector<double> x;

  SimplexPoint() = default;
  explicit SimplexPoint(std::vector<double> v) : x(std::move(v)) {
    double s = 0.0;
    for (double xi : x) {
      if (xi < -1e-12) throw std::invalid_argument("SimplexPoint: negative share");
      s += xi;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("SimplexPoint: shares must sum to 1");
  }
};

inline SimplexPoint seat_shares(const SeatSequence& seq, int num_parties,
                                std::size_t n) {
  if (n < 1 || n > seq.winners.size())
    throw std::invalid_argument("seat_shares: bad prefix length");
  auto c = seq.counts(num_parties, n);
  std::vector<double> x(num_parties);
  for (int i = 0; i < num_parties; ++i)
    x[i] = static_cast<double>(c[i]) / static_cast<double>(n);
  return SimplexPoint(std::move(x));
}

/// columns: step, winner, tie_flag, score_1..score_N (17 significant digits)
inline void write_csv(const SeatSequence& seq, const BallotProfile& p, std::ostream& os) {
  os << "step,winner,tie_flag";
  for (int i = 0; i < p.num_parties; ++i) os << ",score_" << (i + 1);
  os << "\n";
  char buf[64];
  for (std::size_t s = 0; s < seq.winners.size(); ++s) {
    os << (s + 1) << "," << p.names[seq.winners[s]] << ","
       << int(seq.tie_flags[s]);
    const auto& scores = seq.per_step_scores[s];
    for (int i = 0; i < p.num_parties; ++i) {
      os << ",";
      if (i < static_cast<int>(scores.size())) {
        std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
        os << buf;
      }
    }
    os << "\n";
  }
}

}  // namespace circlemap
