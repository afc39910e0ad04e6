#pragma once

#include <string>

namespace memexplore {

/// Scores an open-ended answer from 1 (wrong) to 5 (fully correct).
class Judge {
 public:
  virtual ~Judge() = default;
  virtual int score(const std::string& question, const std::string& reference, const std::string& predicted,
                    const std::string& goal_observation) const = 0;
};

/// Deterministic stand-in: exact match (after trimming, case-insensitive)
/// scores 5; otherwise token F1 >= 0.75 -> 4, >= 0.5 -> 3, >= 0.25 -> 2,
/// else 1.
class RuleJudge : public Judge {
 public:
  int score(const std::string& question, const std::string& reference, const std::string& predicted,
            const std::string& goal_observation) const override;
};

}  // namespace memexplore
