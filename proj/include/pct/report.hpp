#ifndef PCT_REPORT_HPP
#define PCT_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pct/estimators.hpp"
#include "pct/trial_data.hpp"

namespace pct {

// A metrics-by-protocol table: rows are event probabilities and ratio
// metrics, columns are ITT/AT/PP. Cells that could not be computed carry
// a footnote instead of an estimate.
struct ReportCell {
  std::optional<EffectEstimate> estimate;
  std::optional<std::size_t> footnote;  // index into ReportTable::footnotes
};

struct ReportTable {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  std::vector<std::vector<ReportCell>> cells;  // [row][col]
  std::vector<std::string> footnotes;
  std::string treatment_level, reference_level, outcome_event;
  bool paper_rounding = false;
  int precision = 2;

  bool all_failed() const;
  std::string render_text() const;
  std::string render_json() const;
};

struct ReportRequest {
  std::vector<Protocol> protocols{Protocol::ITT, Protocol::AT, Protocol::PP};
  std::vector<EstimateKind> metrics{EstimateKind::Probability,
                                    EstimateKind::RiskRatio,
                                    EstimateKind::OddsRatio};
  std::string treatment_level, reference_level, outcome_event;
  EstimatorOptions options;
  int precision = 2;
  std::optional<std::int64_t> horizon;  // needed for HazardRatio
};

// Computes the requested cells from the complete cases of `d`. Estimator
// refusals (degenerate strata, undefined odds, ...) become footnotes, not
// failures.
ReportTable build_report(const TrialDataset& d, const ReportRequest& request);

}  // namespace pct

#endif  // PCT_REPORT_HPP
