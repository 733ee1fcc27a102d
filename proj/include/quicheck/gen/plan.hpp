#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "quicheck/wire/frame.hpp"

namespace quicheck {

// Which frame kinds a test may generate and how often.
struct GenerationPlan {
  std::vector<FrameKind> allowed;
  // Relative weights; an allowed kind without an entry weighs 1.
  std::map<FrameKind, double> weights;
  std::vector<std::string> mutations;  // Mutation ids, see mutation_table()
  std::size_t max_retries = 64;
  std::size_t max_frames = 4;
  std::size_t max_datagram = 1200;

  bool allows(FrameKind k) const;
  // 0 for kinds outside `allowed`.
  double weight(FrameKind k) const;
  // Empty when the plan is usable; otherwise why not.
  std::string validate() const;

  friend bool operator==(const GenerationPlan&, const GenerationPlan&) = default;
};

}  // namespace quicheck
