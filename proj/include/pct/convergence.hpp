#ifndef PCT_CONVERGENCE_HPP
#define PCT_CONVERGENCE_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "pct/adjustment.hpp"
#include "pct/simulator.hpp"

namespace pct {

// The three interventional estimates for one arm, from one simulated
// trial, next to their exact oracle values.
struct ConvergenceReport {
  std::string arm;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::set<std::string> adjustment_set;

  Rational est_itt, est_at, est_pp;        // plug-in backdoor estimates
  Rational oracle_itt, oracle_at, oracle_pp;

  Rational max_pairwise_gap() const;
  Rational max_oracle_gap() const;

  // Deterministic fixed-layout text rendering.
  std::string render(int places = 4) const;
};

// Simulates n records, then answers do(X=arm), do(X'=arm) and
// do(X=arm, X'=arm) by backdoor adjustment over `adjust_override` (default:
// every adherence covariate). Requires a template-shaped model: unique
// X/X'/Y roles and no direct X->Y edge. Defaults to the first arm label.
ConvergenceReport convergence_report(
    const ScmParams& params, std::uint64_t n, std::uint64_t seed,
    const std::optional<std::string>& arm = std::nullopt,
    const std::optional<std::set<std::string>>& adjust_override = std::nullopt);

}  // namespace pct

#endif  // PCT_CONVERGENCE_HPP
