#include "cpl/confidence_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpl {

bool ConfidenceSetT::contains(Index t) const { return std::binary_search(members.begin(), members.end(), t); }

nlohmann::json ConfidenceSetT::to_json() const {
  nlohmann::json j{{"tau", tau}, {"alpha", alpha}, {"t_hat", t_hat}, {"method", method}, {"members", members}};
  nlohmann::json th = nlohmann::json::array();
  for (double v : thresholds) {
    if (std::isfinite(v)) th.push_back(v);
    else th.push_back(v > 0 ? "inf" : "-inf");
  }
  j["thresholds"] = th;
  if (!flagged.empty()) j["flagged"] = flagged;
  return j;
}

std::string ConfidenceSetT::csv_header() const { return "method,tau,alpha,t_hat,size,members"; }

std::string ConfidenceSetT::csv_row() const {
  std::ostringstream os;
  os << method << ',' << tau << ',' << alpha << ',' << t_hat << ',' << members.size() << ',';
  for (std::size_t i = 0; i < members.size(); ++i) os << (i ? ";" : "") << members[i];
  return os.str();
}

}  // namespace cpl
