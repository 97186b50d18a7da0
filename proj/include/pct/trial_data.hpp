#ifndef PCT_TRIAL_DATA_HPP
#define PCT_TRIAL_DATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pct/errors.hpp"
#include "pct/rational.hpp"

namespace pct {

// Missing values are empty strings (and empty CSV fields).
inline bool is_missing(const std::string& value) { return value.empty(); }

// One patient row, or one aggregated row carrying a count. Aggregated
// rows have no patient_id.
struct TrialRecord {
  std::string patient_id;
  std::string x_prescribed;
  std::string x_received;  // may be missing
  std::string outcome;     // may be missing only when completed == false
  std::optional<std::int64_t> event_time;
  bool completed = true;
  std::vector<std::string> covariates;  // aligned with schema order
  std::uint64_t count = 1;
};

struct DatasetSchema {
  std::vector<std::string> arm_labels;
  std::vector<std::string> outcome_labels;
  // covariate name -> declared levels, in column order
  std::vector<std::pair<std::string, std::vector<std::string>>> covariates;

  const std::vector<std::string>* covariate_levels(const std::string& name) const;
};

// Immutable patient-level dataset. record_count() counts patients, i.e.
// sums the per-row counts of aggregated datasets.
class TrialDataset {
 public:
  // An empty dataset; usually built through create() or load_dataset_csv().
  TrialDataset() = default;

  static TrialDataset create(DatasetSchema schema,
                             std::vector<TrialRecord> records, bool aggregate);

  const DatasetSchema& schema() const { return schema_; }
  const std::vector<TrialRecord>& records() const { return records_; }
  bool aggregate() const { return aggregate_; }
  std::uint64_t record_count() const;

 private:
  DatasetSchema schema_;
  std::vector<TrialRecord> records_;
  bool aggregate_ = false;
};

// CSV format (UTF-8, header required):
//   patient_id,x_prescribed,x_received,outcome,event_time,completed,<covariate...>
// or the aggregated form, which drops patient_id and appends a trailing
// positive-integer `count` column. Missing values are empty fields;
// `completed` is 0 or 1. With no declared schema, labels are collected in
// order of first appearance. Errors name the offending line number
// (the header is line 1).
TrialDataset load_dataset_csv(const std::string& text,
                              const std::optional<DatasetSchema>& declared =
                                  std::nullopt);

std::string dataset_to_csv(const TrialDataset& d);

// Keeps only records with completed == true.
TrialDataset complete_cases(const TrialDataset& d);

// Dense exact-count table over named discrete dimensions.
class ContingencyTable {
 public:
  using Dims = std::vector<std::pair<std::string, std::vector<std::string>>>;

  explicit ContingencyTable(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t cell_count() const { return counts_.size(); }

  BigInt& at(const std::vector<std::size_t>& levels);
  const BigInt& at(const std::vector<std::size_t>& levels) const;

  BigInt total() const;

  // Sum of counts over all cells matching the (variable, level) pairs.
  // Unknown variables or levels are ValidationErrors.
  BigInt count_matching(
      const std::vector<std::pair<std::string, std::string>>& where) const;

  std::size_t flat_index(const std::vector<std::size_t>& levels) const;
  std::vector<std::size_t> decode(std::size_t flat) const;

  std::size_t dim_index(const std::string& variable) const;
  std::size_t level_index(std::size_t dim, const std::string& level) const;

 private:
  Dims dims_;
  std::vector<BigInt> counts_;
};

// Counts records per level tuple of `variables`, each of which is
// x_prescribed, x_received, outcome, or a declared covariate. A record
// with a missing value for a requested variable is an error.
ContingencyTable tabulate(const TrialDataset& d,
                          const std::vector<std::string>& variables);

}  // namespace pct

#endif  // PCT_TRIAL_DATA_HPP
