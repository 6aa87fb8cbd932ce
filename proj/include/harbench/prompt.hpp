#pragma once

#include <string>
#include <vector>

#include "harbench/preprocess.hpp"

namespace harbench {

enum class PromptVariant { cot, direct };

std::string prompt_variant_name(PromptVariant v);
PromptVariant prompt_variant_from_name(const std::string& name);

inline constexpr const char* kCotClosing = "Please make an analysis step by step.";
inline constexpr const char* kDirectClosing =
    "Please give your answer directly without analysis.";

struct PromptTemplate {
  std::string instruction;
  std::string question_preamble;  // placeholders: {placement} {rate_hz} {duration_s}
                                  // {series} {candidate_labels}
  PromptVariant closing = PromptVariant::cot;

  std::string closing_text() const;
};

/// The stock template. Wording is configurable via template files; the two
/// closing sentences are fixed.
PromptTemplate default_template(PromptVariant variant);

/// Template file: instruction block, a line `---`, question block.
PromptTemplate load_template(const std::string& file_content, PromptVariant variant);

struct PromptMetadata {
  std::string placement;
  double rate_hz = 0.0;
  double duration_s = 0.0;
  std::vector<std::string> candidate_labels;
};

struct WindowRef {
  std::string user_id;
  size_t recording_index = 0;
  size_t start_index = 0;
  std::string truth_label;
};

struct RenderedPrompt {
  std::string text;
  WindowRef window_ref;
  PromptVariant variant = PromptVariant::cot;
  std::vector<std::string> candidate_labels;
  std::string content_hash;  // sha256 hex of text
};

/// One line per sensor stream, fixed-point values:
///   x-axis accelerometer: v1, v2, ...
/// Gyroscope lines are emitted only when the window carries gyro data.
std::string serialize_window(const SensorWindow& window, int decimals);

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const SensorWindow& window,
                             const PromptMetadata& metadata, int decimals);

}  // namespace harbench
