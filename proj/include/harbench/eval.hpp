#pragma once

#include <string>
#include <vector>

#include "harbench/dataset.hpp"

namespace harbench {

enum class Outcome { correct, incorrect, abstain };

enum class ScoringMode { abstain, strict };

std::string scoring_mode_name(ScoringMode m);

struct ConfusionMatrix {
  LabelSchema schema;
  std::vector<size_t> counts;          // K*K, rows = truth, cols = prediction
  std::vector<size_t> abstain_counts;  // per truth class

  explicit ConfusionMatrix(const LabelSchema& s)
      : schema(s), counts(s.size() * s.size(), 0), abstain_counts(s.size(), 0) {}

  size_t& at(size_t truth, size_t pred) { return counts[truth * schema.size() + pred]; }
  size_t at(size_t truth, size_t pred) const { return counts[truth * schema.size() + pred]; }
  size_t total() const;

  void add_prediction(int truth_id, int pred_id);
  void add_abstain(int truth_id);
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_denominator = false;  // 0-convention applied somewhere
};

struct EvalReport {
  std::string method;
  std::string partition;   // seen | unseen (or any partition name)
  ScoringMode mode = ScoringMode::abstain;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  size_t scored = 0;
  size_t abstained = 0;
};

double f1_score(double precision, double recall);

/// P = TP/(TP+FP), R = TP/(TP+FN); zero denominators map to 0. In strict
/// mode abstentions count against recall (treated as wrong predictions in a
/// reserved column); in abstain mode they are excluded from the matrix.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& m, ScoringMode mode);

/// Unweighted arithmetic means over classes.
void macro_metrics(const std::vector<ClassMetrics>& per_class, double& precision,
                   double& recall, double& f1);

EvalReport make_report(const ConfusionMatrix& m, ScoringMode mode, const std::string& method,
                       const std::string& partition);

struct RenderedTables {
  std::string overall_csv;
  std::string overall_txt;
  std::string per_class_csv;
  std::string per_class_txt;
};

/// Overall table: rows = method x partition, columns = macro P/R/F1.
/// Per-class table: rows = label x metric, columns = methods.
RenderedTables render_report(const std::vector<EvalReport>& reports);

}  // namespace harbench
