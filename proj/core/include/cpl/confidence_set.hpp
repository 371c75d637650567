#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/models.hpp"

namespace cpl {

struct ConfidenceSetT {
  std::vector<Index> members;     // sorted
  Index tau = 0;
  double alpha = 0.05;
  Index t_hat = 0;
  std::string method;
  std::vector<double> thresholds;  // per-t log thresholds (universal) or empty
  std::vector<Index> flagged;      // t with an empty parameter set (rejected), or Wu's clamped left end
  bool index_shift = false;        // true when members index the last pre-change point (Wu)

  bool contains(Index t) const;
  std::size_t size() const { return members.size(); }
  nlohmann::json to_json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

}  // namespace cpl
