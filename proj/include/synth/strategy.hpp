#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "synth/cantstop.hpp"

namespace synth {

// A strategy failed to produce a usable action. The match harness folds this
// into a loss for the faulting side.
struct StrategyFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Strategy {
 public:
  virtual ~Strategy() = default;

  // May throw StrategyFault. Must return one of legal_actions(s).
  virtual cantstop::Action choose(const cantstop::GameState& s) = 0;

  // Reseeds internal randomness, if any. Called once per match.
  virtual void reseed(uint64_t) {}

  virtual std::unique_ptr<Strategy> clone() const = 0;
  virtual std::string name() const = 0;
};

}  // namespace synth
