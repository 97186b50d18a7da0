#include "pct/report.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "pct/errors.hpp"

namespace pct {

bool ReportTable::all_failed() const {
  for (const auto& row : cells) {
    for (const auto& cell : row) {
      if (cell.estimate) return false;
    }
  }
  return true;
}

std::string ReportTable::render_text() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"metric"};
  header.insert(header.end(), col_names.begin(), col_names.end());
  grid.push_back(header);
  for (std::size_t r = 0; r < row_names.size(); ++r) {
    std::vector<std::string> row{row_names[r]};
    for (const auto& cell : cells[r]) {
      if (cell.estimate) {
        row.push_back(cell.estimate->decimal(precision));
      } else {
        row.push_back("-[" + std::to_string(*cell.footnote + 1) + "]");
      }
    }
    grid.push_back(row);
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string padded = row[c];
      padded.resize(widths[c], ' ');
      line += padded;
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  if (!footnotes.empty()) {
    out += "notes:\n";
    for (std::size_t i = 0; i < footnotes.size(); ++i) {
      out += "  [" + std::to_string(i + 1) + "] " + footnotes[i] + "\n";
    }
  }
  return out;
}

std::string ReportTable::render_json() const {
  nlohmann::ordered_json doc;
  doc["treatment"] = treatment_level;
  doc["reference"] = reference_level;
  doc["event"] = outcome_event;
  doc["paper_rounding"] = paper_rounding;
  doc["precision"] = precision;
  doc["columns"] = col_names;
  doc["rows"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < row_names.size(); ++r) {
    nlohmann::ordered_json row;
    row["metric"] = row_names[r];
    row["cells"] = nlohmann::ordered_json::array();
    for (const auto& cell : cells[r]) {
      nlohmann::ordered_json c;
      if (cell.estimate) {
        c["value"] = cell.estimate->decimal(precision);
        c["exact"] = rational_string(cell.estimate->value);
      } else {
        c["error"] = footnotes[*cell.footnote];
      }
      row["cells"].push_back(std::move(c));
    }
    doc["rows"].push_back(std::move(row));
  }
  doc["notes"] = footnotes;
  return doc.dump(2) + "\n";
}

namespace {

std::string metric_row_name(EstimateKind kind, const ReportRequest& request,
                            int part) {
  switch (kind) {
    case EstimateKind::Probability:
      return "p(" + request.outcome_event + "|" +
             (part == 0 ? request.treatment_level : request.reference_level) +
             ")";
    case EstimateKind::RiskRatio: return "RR";
    case EstimateKind::OddsRatio: return "OR";
    case EstimateKind::HazardRatio: return "HR";
  }
  throw ValidationError("unknown metric");
}

}  // namespace

ReportTable build_report(const TrialDataset& d, const ReportRequest& request) {
  ReportTable table;
  table.treatment_level = request.treatment_level;
  table.reference_level = request.reference_level;
  table.outcome_event = request.outcome_event;
  table.paper_rounding = request.options.paper_rounding;
  table.precision = request.precision;
  for (const auto& p : request.protocols) {
    table.col_names.push_back(protocol_name(p));
  }

  TrialDataset analysable = complete_cases(d);

  auto footnote = [&](const std::string& text) {
    for (std::size_t i = 0; i < table.footnotes.size(); ++i) {
      if (table.footnotes[i] == text) return i;
    }
    table.footnotes.push_back(text);
    return table.footnotes.size() - 1;
  };

  // One tabulation per protocol (reused across metrics).
  std::vector<std::optional<ContingencyTable>> tables;
  std::vector<std::optional<std::size_t>> table_errors;
  for (const auto& protocol : request.protocols) {
    std::vector<std::string> vars;
    switch (protocol) {
      case Protocol::ITT: vars = {"x_prescribed", "outcome"}; break;
      case Protocol::AT: vars = {"x_received", "outcome"}; break;
      case Protocol::PP: vars = {"x_prescribed", "x_received", "outcome"}; break;
    }
    try {
      tables.emplace_back(tabulate(analysable, vars));
      table_errors.emplace_back(std::nullopt);
    } catch (const Error& e) {
      tables.emplace_back(std::nullopt);
      table_errors.emplace_back(footnote(e.what()));
    }
  }

  for (const auto& kind : request.metrics) {
    int parts = kind == EstimateKind::Probability ? 2 : 1;
    for (int part = 0; part < parts; ++part) {
      table.row_names.push_back(metric_row_name(kind, request, part));
      std::vector<ReportCell> row;
      for (std::size_t c = 0; c < request.protocols.size(); ++c) {
        ProtocolSpec spec{request.protocols[c], request.treatment_level,
                          request.reference_level, request.outcome_event};
        ReportCell cell;
        if (!tables[c]) {
          cell.footnote = table_errors[c];
          row.push_back(cell);
          continue;
        }
        try {
          switch (kind) {
            case EstimateKind::Probability: {
              const std::string& arm = part == 0 ? request.treatment_level
                                                 : request.reference_level;
              auto e = event_probability(*tables[c], spec, arm);
              if (request.options.paper_rounding) {
                e.value = round_rational(e.value,
                                         request.options.intermediate_places);
                e.intermediate_rounding = request.options.intermediate_places;
              }
              cell.estimate = std::move(e);
              break;
            }
            case EstimateKind::RiskRatio:
              cell.estimate = risk_ratio(*tables[c], spec, request.options);
              break;
            case EstimateKind::OddsRatio:
              cell.estimate = odds_ratio(*tables[c], spec, request.options);
              break;
            case EstimateKind::HazardRatio: {
              if (!request.horizon) {
                throw ValidationError("hazard ratio needs a time horizon");
              }
              cell.estimate = hazard_ratio(analysable, spec, *request.horizon);
              break;
            }
          }
        } catch (const Error& e) {
          cell.footnote = footnote(e.what());
        }
        row.push_back(std::move(cell));
      }
      table.cells.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace pct
