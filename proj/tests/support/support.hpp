#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalqa/rng.hpp"
#include "causalqa/scm.hpp"

namespace testsupport {

// Small deterministic generators for property tests.  Every property runs a
// fixed number of trials from a fixed seed so failures reproduce.
inline constexpr int kTrials = 300;

inline causalqa::Rng trial_rng(std::uint64_t property, int trial) {
  return causalqa::Rng(0x7E57u + property).split(static_cast<std::uint64_t>(trial));
}

inline bool coin(causalqa::Rng& r) { return r.bernoulli(0.5); }

inline causalqa::UnitOutcome any_unit(causalqa::Rng& r) {
  causalqa::UnitOutcome u;
  u.context_id = static_cast<std::uint64_t>(r.uniform_int(0, 1000));
  u.cause = "X";
  u.effect = "Y";
  u.x = coin(r);
  u.y = coin(r);
  u.y_cf = coin(r);
  return u;
}

// All eight (x, y, y_cf) truth triples.
inline std::vector<causalqa::UnitOutcome> all_units() {
  std::vector<causalqa::UnitOutcome> out;
  for (int b = 0; b < 8; ++b) {
    causalqa::UnitOutcome u;
    u.cause = "X";
    u.effect = "Y";
    u.x = b & 4;
    u.y = b & 2;
    u.y_cf = b & 1;
    out.push_back(u);
  }
  return out;
}

}  // namespace testsupport
