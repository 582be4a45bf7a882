#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "circlemap/election.hpp"

namespace circlemap {

/// Profile document format:
///   { "parties": ["A", "B"],
///     "votes": [ { "set": ["A"], "weight": 0.4 }, ... ] }
/// Parsing canonicalizes: set members sorted by party order, duplicate sets
/// merged by weight addition, zero-weight entries dropped.
inline BallotProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("parties") || !j.contains("votes"))
    throw std::invalid_argument("profile: need top-level 'parties' and 'votes'");
  std::vector<std::string> names = j.at("parties").get<std::vector<std::string>>();
  if (names.empty() || names.size() > max_parties)
    throw std::invalid_argument("profile: need between 1 and 20 parties");
  auto index_of = [&](const std::string& nm) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == nm) return static_cast<int>(i);
    throw std::invalid_argument("profile: vote names unknown party '" + nm + "'");
  };
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t k = i + 1; k < names.size(); ++k)
      if (names[i] == names[k])
        throw std::invalid_argument("profile: duplicate party name '" + names[i] + "'");
  std::vector<std::pair<PartySet, double>> raw;
  for (const auto& entry : j.at("votes")) {
    if (!entry.contains("set") || !entry.contains("weight"))
      throw std::invalid_argument("profile: each vote needs 'set' and 'weight'");
    PartySet mask = 0;
    for (const auto& nm : entry.at("set"))
      mask |= (1u << index_of(nm.get<std::string>()));
    raw.emplace_back(mask, entry.at("weight").get<double>());
  }
  const int n = static_cast<int>(names.size());
  return BallotProfile(n, std::move(raw), std::move(names));
}

inline BallotProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed profile file " + path + ": " + e.what());
  }
  return profile_from_json(j);
}

inline nlohmann::ordered_json profile_to_json(const BallotProfile& p) {
  nlohmann::ordered_json j;
  j["parties"] = p.names;
  nlohmann::ordered_json votes = nlohmann::ordered_json::array();
  for (const auto& [mask, w] : p.votes) {
    nlohmann::ordered_json entry;
    nlohmann::ordered_json set = nlohmann::ordered_json::array();
    for (int i = 0; i < p.num_parties; ++i)
      if (party_in(mask, i)) set.push_back(p.names[i]);
    entry["set"] = std::move(set);
    entry["weight"] = w;
    votes.push_back(std::move(entry));
  }
  j["votes"] = std::move(votes);
  return j;
}

/// byte-stable emission: canonical ordering plus fixed two-space indentation
inline std::string canonical_profile_string(const BallotProfile& p) {
  return profile_to_json(p).dump(2) + "\n";
}

inline void save_profile(const BallotProfile& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write profile file: " + path);
  out << canonical_profile_string(p);
}

}  // namespace circlemap
