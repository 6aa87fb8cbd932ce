#pragma once

#include <string>
#include <vector>

#include "harbench/dataset.hpp"
#include "harbench/eval.hpp"

namespace harbench {

enum class AnswerKind { label, ambiguous, no_answer };

struct ParsedAnswer {
  AnswerKind kind = AnswerKind::no_answer;
  std::string label;                   // canonical, set when kind == label
  std::vector<std::string> candidates; // >= 2 distinct schema labels when ambiguous
  size_t evidence_begin = 0;           // decisive sentence span in the source text
  size_t evidence_end = 0;
};

/// Extracts one activity from free-form model output. Sentences are scanned
/// last to first; the first sentence with a conclusive cue ("most likely",
/// "the activity is", "answer:", or the label alone) and exactly one schema
/// label wins. A conclusive sentence naming two or more labels is ambiguous.
/// With no conclusive sentence, falls back to whole-text label mentions.
/// Total: every input maps to an outcome.
ParsedAnswer parse_answer(const std::string& response_text, const LabelSchema& schema);

Outcome score_outcome(const ParsedAnswer& parsed, const std::string& truth_label,
                      const LabelSchema& schema, ScoringMode mode);

}  // namespace harbench
