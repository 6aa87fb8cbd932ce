#include "harbench/parse.hpp"

#include <algorithm>
#include <cctype>

#include "harbench/util.hpp"

namespace harbench {

namespace {

struct Sentence {
  size_t begin, end;  // [begin, end) into the source text
};

// '.', '!' or '?' followed by whitespace/EOT ends a sentence, as does a
// newline; keeps "0.5" or "1.2Hz" inside one sentence
std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> out;
  size_t begin = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool boundary = false;
    if (c == '\n') boundary = true;
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      boundary = true;
    }
    if (boundary) {
      if (i + 1 > begin) out.push_back({begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < text.size()) out.push_back({begin, text.size()});
  return out;
}

// distinct canonical schema labels mentioned in `lower`, schema order
std::vector<std::string> labels_in(const std::string& lower, const LabelSchema& schema) {
  std::vector<std::string> found;
  for (const auto& [surface, canonical] : label_synonyms()) {
    if (!schema.contains(canonical)) continue;
    if (count_occurrences(lower, surface) == 0) continue;
    if (std::find(found.begin(), found.end(), canonical) == found.end()) {
      found.push_back(canonical);
    }
  }
  std::sort(found.begin(), found.end(), [&](const std::string& a, const std::string& b) {
    return schema.index_of(a) < schema.index_of(b);
  });
  return found;
}

bool has_conclusive_cue(const std::string& lower, const LabelSchema& schema) {
  if (lower.find("most likely") != std::string::npos) return true;
  if (lower.find("the activity is") != std::string::npos) return true;
  if (lower.find("answer:") != std::string::npos) return true;
  if (lower.find("answer is") != std::string::npos) return true;
  // the label alone, modulo surrounding punctuation
  std::string bare = trim(lower);
  while (!bare.empty() && (bare.back() == '.' || bare.back() == '!' || bare.back() == '?' ||
                           bare.back() == '"')) {
    bare.pop_back();
  }
  bare = trim(bare);
  for (const auto& [surface, canonical] : label_synonyms()) {
    if (schema.contains(canonical) && bare == surface) return true;
  }
  return false;
}

}  // namespace

ParsedAnswer parse_answer(const std::string& response_text, const LabelSchema& schema) {
  ParsedAnswer out;
  auto sentences = split_sentences(response_text);

  // pass 1: last conclusive sentence wins
  for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) {
    std::string lower = to_lower(
        std::string_view(response_text).substr(it->begin, it->end - it->begin));
    auto labels = labels_in(lower, schema);
    if (labels.empty()) continue;
    if (!has_conclusive_cue(lower, schema)) continue;
    out.evidence_begin = it->begin;
    out.evidence_end = it->end;
    if (labels.size() == 1) {
      out.kind = AnswerKind::label;
      out.label = labels.front();
    } else {
      out.kind = AnswerKind::ambiguous;
      out.candidates = labels;
    }
    return out;
  }

  // pass 2: whole-text fallback
  std::vector<std::string> all = labels_in(to_lower(response_text), schema);
  if (all.empty()) {
    out.kind = AnswerKind::no_answer;
    return out;
  }
  // last sentence that mentions any schema label is the concluding position
  for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) {
    std::string lower = to_lower(
        std::string_view(response_text).substr(it->begin, it->end - it->begin));
    auto labels = labels_in(lower, schema);
    if (labels.empty()) continue;
    out.evidence_begin = it->begin;
    out.evidence_end = it->end;
    if (all.size() == 1) {
      out.kind = AnswerKind::label;
      out.label = all.front();
    } else if (labels.size() >= 2) {
      out.kind = AnswerKind::ambiguous;
      out.candidates = labels;
    } else {
      out.kind = AnswerKind::label;
      out.label = labels.front();
    }
    return out;
  }
  out.kind = AnswerKind::no_answer;  // unreachable: `all` nonempty implies a sentence hit
  return out;
}

Outcome score_outcome(const ParsedAnswer& parsed, const std::string& truth_label,
                      const LabelSchema& schema, ScoringMode mode) {
  if (!schema.contains(truth_label)) fail("score: truth label outside schema");
  switch (parsed.kind) {
    case AnswerKind::label:
      return parsed.label == truth_label ? Outcome::correct : Outcome::incorrect;
    case AnswerKind::ambiguous:
    case AnswerKind::no_answer:
      return mode == ScoringMode::strict ? Outcome::incorrect : Outcome::abstain;
  }
  return Outcome::abstain;
}

}  // namespace harbench
