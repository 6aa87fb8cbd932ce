#include "harbench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "harbench/util.hpp"

namespace harbench {

std::string scoring_mode_name(ScoringMode m) {
  return m == ScoringMode::abstain ? "abstain" : "strict";
}

size_t ConfusionMatrix::total() const {
  size_t t = 0;
  for (size_t c : counts) t += c;
  for (size_t c : abstain_counts) t += c;
  return t;
}

void ConfusionMatrix::add_prediction(int truth_id, int pred_id) {
  if (truth_id < 0 || static_cast<size_t>(truth_id) >= schema.size()) {
    fail("confusion: truth label outside schema");
  }
  if (pred_id < 0 || static_cast<size_t>(pred_id) >= schema.size()) {
    fail("confusion: predicted label outside schema");
  }
  at(static_cast<size_t>(truth_id), static_cast<size_t>(pred_id)) += 1;
}

void ConfusionMatrix::add_abstain(int truth_id) {
  if (truth_id < 0 || static_cast<size_t>(truth_id) >= schema.size()) {
    fail("confusion: truth label outside schema");
  }
  abstain_counts[static_cast<size_t>(truth_id)] += 1;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& m, ScoringMode mode) {
  size_t k = m.schema.size();
  std::vector<ClassMetrics> out(k);
  for (size_t c = 0; c < k; ++c) {
    size_t tp = m.at(c, c);
    size_t fp = 0, fn = 0;
    for (size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += m.at(o, c);
      fn += m.at(c, o);
    }
    if (mode == ScoringMode::strict) fn += m.abstain_counts[c];

    ClassMetrics& cm = out[c];
    cm.label = m.schema.labels[c];
    if (tp + fp == 0) {
      cm.precision = 0.0;
      cm.zero_denominator = true;
    } else {
      cm.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
      cm.recall = 0.0;
      cm.zero_denominator = true;
    } else {
      cm.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    cm.f1 = f1_score(cm.precision, cm.recall);
  }
  return out;
}

void macro_metrics(const std::vector<ClassMetrics>& per_class, double& precision,
                   double& recall, double& f1) {
  if (per_class.empty()) fail("macro: no classes");
  precision = recall = f1 = 0.0;
  for (const auto& c : per_class) {
    precision += c.precision;
    recall += c.recall;
    f1 += c.f1;
  }
  double k = static_cast<double>(per_class.size());
  precision /= k;
  recall /= k;
  f1 /= k;
}

EvalReport make_report(const ConfusionMatrix& m, ScoringMode mode, const std::string& method,
                       const std::string& partition) {
  EvalReport r;
  r.method = method;
  r.partition = partition;
  r.mode = mode;
  r.per_class = per_class_metrics(m, mode);
  macro_metrics(r.per_class, r.macro_precision, r.macro_recall, r.macro_f1);
  for (size_t c : m.counts) r.scored += c;
  for (size_t c : m.abstain_counts) r.abstained += c;
  return r;
}

namespace {

std::string fmt_metric(double v, bool missing = false) {
  return missing ? std::string("\xE2\x80\x94") : format_fixed(v, 3);  // em dash when absent
}

void pad(std::string& s, size_t width) {
  while (s.size() < width) s.push_back(' ');
}

std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      std::string cell = row[i];
      pad(cell, widths[i]);
      line += cell;
      if (i + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

RenderedTables render_report(const std::vector<EvalReport>& reports) {
  RenderedTables out;

  // overall: one row per (method, partition, mode)
  {
    std::string csv = "method,partition,mode,macro_precision,macro_recall,macro_f1,scored,abstained\n";
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Method", "Partition", "Mode", "Precision", "Recall", "F1-Score",
                    "Scored", "Abstained"});
    for (const auto& r : reports) {
      csv += r.method + "," + r.partition + "," + scoring_mode_name(r.mode) + "," +
             format_fixed(r.macro_precision, 3) + "," + format_fixed(r.macro_recall, 3) +
             "," + format_fixed(r.macro_f1, 3) + "," + std::to_string(r.scored) + "," +
             std::to_string(r.abstained) + "\n";
      rows.push_back({r.method, r.partition, scoring_mode_name(r.mode),
                      fmt_metric(r.macro_precision), fmt_metric(r.macro_recall),
                      fmt_metric(r.macro_f1), std::to_string(r.scored),
                      std::to_string(r.abstained)});
    }
    out.overall_csv = csv;
    out.overall_txt = aligned_table(rows);
  }

  // per-class: rows = label x metric, columns = method/partition/mode triplets
  {
    std::vector<std::string> columns;
    std::vector<std::string> labels;
    for (const auto& r : reports) {
      columns.push_back(r.method + "/" + r.partition + "/" + scoring_mode_name(r.mode));
      for (const auto& c : r.per_class) {
        if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) {
          labels.push_back(c.label);
        }
      }
    }
    bool any_zero_denominator = false;
    auto metric_of = [&](const EvalReport& r, const std::string& label, int which,
                         bool& found, bool& flagged) -> double {
      for (const auto& c : r.per_class) {
        if (c.label == label) {
          found = true;
          flagged = c.zero_denominator;
          return which == 0 ? c.precision : which == 1 ? c.recall : c.f1;
        }
      }
      found = false;
      flagged = false;
      return 0.0;
    };

    std::string csv = "label,metric";
    for (const auto& col : columns) csv += "," + col;
    csv += '\n';
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"Label", "Metric"};
    header.insert(header.end(), columns.begin(), columns.end());
    rows.push_back(header);

    static const char* metric_names[3] = {"precision", "recall", "f1"};
    for (const auto& label : labels) {
      for (int which = 0; which < 3; ++which) {
        std::string csv_row = label + "," + metric_names[which];
        std::vector<std::string> row = {label, metric_names[which]};
        for (const auto& r : reports) {
          bool found = false, flagged = false;
          double v = metric_of(r, label, which, found, flagged);
          csv_row += "," + (found ? format_fixed(v, 3) : std::string(""));
          std::string cell = fmt_metric(v, !found);
          if (found && flagged) {
            cell += "*";
            any_zero_denominator = true;
          }
          row.push_back(cell);
        }
        csv += csv_row + "\n";
        rows.push_back(row);
      }
    }
    out.per_class_csv = csv;
    out.per_class_txt = aligned_table(rows);
    if (any_zero_denominator) {
      out.per_class_txt += "* zero-denominator convention: undefined ratio reported as 0\n";
    }
  }
  return out;
}

}  // namespace harbench
