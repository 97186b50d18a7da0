#include "pct/trial_data.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_set>

namespace pct {

const std::vector<std::string>* DatasetSchema::covariate_levels(
    const std::string& name) const {
  for (const auto& [n, levels] : covariates) {
    if (n == name) return &levels;
  }
  return nullptr;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void validate_record(const DatasetSchema& schema, const TrialRecord& r,
                     const std::string& where) {
  if (r.x_prescribed.empty()) {
    throw ValidationError(where + ": x_prescribed is required");
  }
  if (!contains(schema.arm_labels, r.x_prescribed)) {
    throw ValidationError(where + ": undeclared arm label '" + r.x_prescribed +
                          "'");
  }
  if (!r.x_received.empty() && !contains(schema.arm_labels, r.x_received)) {
    throw ValidationError(where + ": undeclared arm label '" + r.x_received +
                          "'");
  }
  // No imputation: a completed record may omit x_received only when the
  // schema declares the empty string as an explicit level.
  if (r.completed && r.x_received.empty() &&
      !contains(schema.arm_labels, "")) {
    throw ValidationError(where + ": completed record with missing x_received");
  }
  if (r.completed && r.outcome.empty()) {
    throw ValidationError(where + ": completed record with missing outcome");
  }
  if (!r.outcome.empty() && !contains(schema.outcome_labels, r.outcome)) {
    throw ValidationError(where + ": undeclared outcome label '" + r.outcome +
                          "'");
  }
  if (r.event_time && r.outcome.empty()) {
    throw ValidationError(where + ": event_time present without an outcome");
  }
  if (r.event_time && *r.event_time < 0) {
    throw ValidationError(where + ": negative event_time");
  }
  if (r.covariates.size() != schema.covariates.size()) {
    throw ValidationError(where + ": expected " +
                          std::to_string(schema.covariates.size()) +
                          " covariate values, got " +
                          std::to_string(r.covariates.size()));
  }
  for (std::size_t i = 0; i < r.covariates.size(); ++i) {
    const auto& [name, levels] = schema.covariates[i];
    if (!contains(levels, r.covariates[i])) {
      throw ValidationError(where + ": undeclared level '" + r.covariates[i] +
                            "' for covariate '" + name + "'");
    }
  }
  if (r.count == 0) throw ValidationError(where + ": zero count");
}

}  // namespace

TrialDataset TrialDataset::create(DatasetSchema schema,
                                  std::vector<TrialRecord> records,
                                  bool aggregate) {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string where = "record " + std::to_string(i + 1);
    validate_record(schema, r, where);
    if (!aggregate) {
      if (r.patient_id.empty()) {
        throw ValidationError(where + ": patient_id is required");
      }
      if (!ids.insert(r.patient_id).second) {
        throw ValidationError(where + ": duplicate patient_id '" +
                              r.patient_id + "'");
      }
    }
  }
  TrialDataset d;
  d.schema_ = std::move(schema);
  d.records_ = std::move(records);
  d.aggregate_ = aggregate;
  return d;
}

std::uint64_t TrialDataset::record_count() const {
  std::uint64_t total = 0;
  for (const auto& r : records_) total += r.count;
  return total;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

void note_label(std::vector<std::string>& labels, const std::string& value) {
  if (!value.empty() && !contains(labels, value)) labels.push_back(value);
}

}  // namespace

TrialDataset load_dataset_csv(const std::string& text,
                              const std::optional<DatasetSchema>& declared) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  auto header = split_csv_line(line);

  static const std::vector<std::string> kCore = {
      "patient_id", "x_prescribed", "x_received",
      "outcome",    "event_time",   "completed"};

  bool aggregate = false;
  std::size_t first_cov = 0;
  if (header.size() >= kCore.size() &&
      std::equal(kCore.begin(), kCore.end(), header.begin())) {
    first_cov = kCore.size();
  } else if (header.size() >= kCore.size() &&
             std::equal(kCore.begin() + 1, kCore.end(), header.begin()) &&
             header.back() == "count") {
    aggregate = true;
    first_cov = kCore.size() - 1;
  } else {
    throw ParseError(
        "line 1: header must start with patient_id,x_prescribed,x_received,"
        "outcome,event_time,completed (or the aggregate form without "
        "patient_id and with a trailing count column)",
        1);
  }
  std::size_t cov_end = aggregate ? header.size() - 1 : header.size();
  std::vector<std::string> cov_names(header.begin() + first_cov,
                                     header.begin() + cov_end);
  for (const auto& name : cov_names) {
    if (name.empty() || name == "count") {
      throw ParseError("line 1: bad covariate column name", 1);
    }
  }
  std::set<std::string> unique_covs(cov_names.begin(), cov_names.end());
  if (unique_covs.size() != cov_names.size()) {
    throw ParseError("line 1: duplicate covariate column", 1);
  }

  DatasetSchema schema;
  if (declared) {
    schema = *declared;
    if (schema.covariates.size() != cov_names.size()) {
      throw ValidationError("declared schema has " +
                            std::to_string(schema.covariates.size()) +
                            " covariates but file has " +
                            std::to_string(cov_names.size()));
    }
    for (std::size_t i = 0; i < cov_names.size(); ++i) {
      if (schema.covariates[i].first != cov_names[i]) {
        throw ValidationError("covariate column '" + cov_names[i] +
                              "' does not match declared '" +
                              schema.covariates[i].first + "'");
      }
    }
  } else {
    for (const auto& name : cov_names) schema.covariates.emplace_back(name, std::vector<std::string>{});
  }

  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    TrialRecord r;
    std::size_t k = 0;
    if (!aggregate) r.patient_id = fields[k++];
    r.x_prescribed = fields[k++];
    r.x_received = fields[k++];
    r.outcome = fields[k++];
    const std::string& time_text = fields[k++];
    if (!time_text.empty()) {
      std::int64_t value = 0;
      auto [p, ec] = std::from_chars(time_text.data(),
                                     time_text.data() + time_text.size(), value);
      if (ec != std::errc() || p != time_text.data() + time_text.size() ||
          value < 0) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": bad event_time '" + time_text + "'",
                         line_no);
      }
      r.event_time = value;
    }
    const std::string& completed_text = fields[k++];
    if (completed_text == "0") {
      r.completed = false;
    } else if (completed_text == "1") {
      r.completed = true;
    } else {
      throw ParseError("line " + std::to_string(line_no) +
                           ": completed must be 0 or 1, got '" +
                           completed_text + "'",
                       line_no);
    }
    for (std::size_t i = 0; i < cov_names.size(); ++i) {
      r.covariates.push_back(fields[k++]);
    }
    if (aggregate) {
      const std::string& count_text = fields[k++];
      std::uint64_t value = 0;
      auto [p, ec] = std::from_chars(
          count_text.data(), count_text.data() + count_text.size(), value);
      if (ec != std::errc() || p != count_text.data() + count_text.size() ||
          value == 0) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": count must be a positive integer, got '" +
                             count_text + "'",
                         line_no);
      }
      r.count = value;
    }

    if (!declared) {
      note_label(schema.arm_labels, r.x_prescribed);
      note_label(schema.arm_labels, r.x_received);
      note_label(schema.outcome_labels, r.outcome);
      for (std::size_t i = 0; i < cov_names.size(); ++i) {
        note_label(schema.covariates[i].second, r.covariates[i]);
      }
    }

    try {
      validate_record(schema, r, "line " + std::to_string(line_no));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    records.push_back(std::move(r));
  }

  try {
    return TrialDataset::create(std::move(schema), std::move(records),
                                aggregate);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

std::string dataset_to_csv(const TrialDataset& d) {
  std::string out;
  if (!d.aggregate()) out += "patient_id,";
  out += "x_prescribed,x_received,outcome,event_time,completed";
  for (const auto& [name, levels] : d.schema().covariates) {
    (void)levels;
    out += "," + name;
  }
  if (d.aggregate()) out += ",count";
  out += "\n";

  for (const auto& r : d.records()) {
    std::string row;
    if (!d.aggregate()) row += r.patient_id + ",";
    row += r.x_prescribed + "," + r.x_received + "," + r.outcome + ",";
    if (r.event_time) row += std::to_string(*r.event_time);
    row += ",";
    row += r.completed ? "1" : "0";
    for (const auto& value : r.covariates) row += "," + value;
    if (d.aggregate()) row += "," + std::to_string(r.count);
    out += row + "\n";
  }
  return out;
}

TrialDataset complete_cases(const TrialDataset& d) {
  std::vector<TrialRecord> kept;
  for (const auto& r : d.records()) {
    if (r.completed) kept.push_back(r);
  }
  return TrialDataset::create(d.schema(), std::move(kept), d.aggregate());
}

ContingencyTable::ContingencyTable(Dims dims) : dims_(std::move(dims)) {
  std::size_t cells = 1;
  for (const auto& [name, levels] : dims_) {
    if (name.empty()) throw ValidationError("dimension name must be non-empty");
    if (levels.empty()) {
      throw ValidationError("dimension '" + name + "' has no levels");
    }
    std::set<std::string> unique(levels.begin(), levels.end());
    if (unique.size() != levels.size()) {
      throw ValidationError("dimension '" + name + "' has duplicate levels");
    }
    cells *= levels.size();
  }
  counts_.assign(cells, BigInt(0));
}

std::size_t ContingencyTable::flat_index(
    const std::vector<std::size_t>& levels) const {
  if (levels.size() != dims_.size()) {
    throw ValidationError("index arity mismatch");
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (levels[i] >= dims_[i].second.size()) {
      throw ValidationError("level index out of range for dimension '" +
                            dims_[i].first + "'");
    }
    flat = flat * dims_[i].second.size() + levels[i];
  }
  return flat;
}

std::vector<std::size_t> ContingencyTable::decode(std::size_t flat) const {
  std::vector<std::size_t> levels(dims_.size());
  for (std::size_t i = dims_.size(); i-- > 0;) {
    levels[i] = flat % dims_[i].second.size();
    flat /= dims_[i].second.size();
  }
  return levels;
}

BigInt& ContingencyTable::at(const std::vector<std::size_t>& levels) {
  return counts_[flat_index(levels)];
}

const BigInt& ContingencyTable::at(
    const std::vector<std::size_t>& levels) const {
  return counts_[flat_index(levels)];
}

BigInt ContingencyTable::total() const {
  BigInt sum = 0;
  for (const auto& c : counts_) sum += c;
  return sum;
}

std::size_t ContingencyTable::dim_index(const std::string& variable) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].first == variable) return i;
  }
  throw ValidationError("table has no dimension '" + variable + "'");
}

std::size_t ContingencyTable::level_index(std::size_t dim,
                                          const std::string& level) const {
  const auto& levels = dims_[dim].second;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return i;
  }
  throw ValidationError("dimension '" + dims_[dim].first +
                        "' has no level '" + level + "'");
}

BigInt ContingencyTable::count_matching(
    const std::vector<std::pair<std::string, std::string>>& where) const {
  std::vector<std::optional<std::size_t>> fixed(dims_.size());
  for (const auto& [variable, level] : where) {
    std::size_t d = dim_index(variable);
    std::size_t l = level_index(d, level);
    if (fixed[d] && *fixed[d] != l) return 0;
    fixed[d] = l;
  }
  BigInt sum = 0;
  for (std::size_t flat = 0; flat < counts_.size(); ++flat) {
    if (counts_[flat] == 0) continue;
    auto levels = decode(flat);
    bool match = true;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (fixed[i] && levels[i] != *fixed[i]) {
        match = false;
        break;
      }
    }
    if (match) sum += counts_[flat];
  }
  return sum;
}

ContingencyTable tabulate(const TrialDataset& d,
                          const std::vector<std::string>& variables) {
  const auto& schema = d.schema();

  // Variable accessors and level lists.
  struct Axis {
    const std::vector<std::string>* levels;
    int kind;  // 0 prescribed, 1 received, 2 outcome, >=3 covariate index
  };
  std::vector<Axis> axes;
  ContingencyTable::Dims dims;
  for (const auto& v : variables) {
    if (v == "x_prescribed") {
      axes.push_back({&schema.arm_labels, 0});
    } else if (v == "x_received") {
      axes.push_back({&schema.arm_labels, 1});
    } else if (v == "outcome") {
      axes.push_back({&schema.outcome_labels, 2});
    } else {
      const auto* levels = schema.covariate_levels(v);
      if (!levels) throw ValidationError("unknown variable '" + v + "'");
      int idx = 3;
      for (std::size_t i = 0; i < schema.covariates.size(); ++i) {
        if (schema.covariates[i].first == v) idx = 3 + static_cast<int>(i);
      }
      axes.push_back({levels, idx});
    }
    dims.emplace_back(v, *axes.back().levels);
  }

  ContingencyTable table(std::move(dims));
  std::vector<std::size_t> idx(variables.size());
  std::size_t row = 0;
  for (const auto& r : d.records()) {
    ++row;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const std::string* value = nullptr;
      switch (axes[i].kind) {
        case 0: value = &r.x_prescribed; break;
        case 1: value = &r.x_received; break;
        case 2: value = &r.outcome; break;
        default: value = &r.covariates[axes[i].kind - 3]; break;
      }
      if (is_missing(*value)) {
        throw ValidationError("record " + std::to_string(row) +
                              " has a missing value for '" + variables[i] +
                              "'");
      }
      const auto& levels = *axes[i].levels;
      std::size_t at = levels.size();
      for (std::size_t l = 0; l < levels.size(); ++l) {
        if (levels[l] == *value) {
          at = l;
          break;
        }
      }
      idx[i] = at;  // guaranteed valid: records are schema-validated
    }
    table.at(idx) += r.count;
  }
  return table;
}

}  // namespace pct
