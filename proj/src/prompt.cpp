#include "harbench/prompt.hpp"

#include <cmath>

#include "harbench/util.hpp"

namespace harbench {

std::string prompt_variant_name(PromptVariant v) {
  return v == PromptVariant::cot ? "cot" : "do";
}

PromptVariant prompt_variant_from_name(const std::string& name) {
  std::string n = to_lower(name);
  if (n == "cot") return PromptVariant::cot;
  if (n == "do" || n == "direct") return PromptVariant::direct;
  fail("unknown prompt variant: " + name);
}

std::string PromptTemplate::closing_text() const {
  return closing == PromptVariant::cot ? kCotClosing : kDirectClosing;
}

PromptTemplate default_template(PromptVariant variant) {
  PromptTemplate t;
  t.instruction = "You are an expert in analyzing human activity from IMU sensor recordings.";
  t.question_preamble =
      "The following is IMU data collected from a sensor worn on the {placement} of a "
      "person, sampled at {rate_hz} Hz for {duration_s} seconds.\n"
      "{series}\n"
      "The person's activity belongs to one of the following categories: "
      "{candidate_labels}.\n"
      "Could you please tell what activity the person was doing based on the given "
      "information and IMU readings?";
  t.closing = variant;
  return t;
}

PromptTemplate load_template(const std::string& file_content, PromptVariant variant) {
  size_t sep = file_content.find("\n---\n");
  if (sep == std::string::npos) {
    fail("template file must contain an instruction block, a '---' line, and a question block");
  }
  PromptTemplate t;
  t.instruction = trim(file_content.substr(0, sep));
  t.question_preamble = trim(file_content.substr(sep + 5));
  t.closing = variant;
  if (t.instruction.empty() || t.question_preamble.empty()) {
    fail("template file has an empty block");
  }
  return t;
}

std::string serialize_window(const SensorWindow& window, int decimals) {
  if (decimals < 0 || decimals > 6) fail("serialize_window: decimals must be in 0..6");
  static const char* axis_names[3] = {"x", "y", "z"};
  auto stream_line = [&](const char* axis, const char* sensor, size_t c) {
    std::string line = std::string(axis) + "-axis " + sensor + ": ";
    for (size_t t = 0; t < window.n; ++t) {
      double v = window.channel_at(t, c);
      if (!std::isfinite(v)) fail("serialize_window: non-finite value in window");
      if (t > 0) line += ", ";
      line += format_fixed(v, decimals);
    }
    return line;
  };
  std::string out;
  for (size_t a = 0; a < 3; ++a) {
    out += stream_line(axis_names[a], "accelerometer", a);
    out += '\n';
  }
  if (window.has_gyro()) {
    for (size_t a = 0; a < 3; ++a) {
      out += stream_line(axis_names[a], "gyroscope", a + 3);
      out += '\n';
    }
  }
  if (!out.empty()) out.pop_back();
  return out;
}

namespace {

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ", ";
    out += labels[i];
  }
  return out;
}

std::string format_number(double v) {
  // trims trailing zeros so "10" renders as 10, "12.5" as 12.5
  std::string s = format_fixed(v, 3);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void substitute(std::string& text, const std::string& key, const std::string& value) {
  std::string needle = "{" + key + "}";
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

}  // namespace

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const SensorWindow& window,
                             const PromptMetadata& metadata, int decimals) {
  if (metadata.candidate_labels.empty()) fail("render: no candidate labels");

  std::string series = serialize_window(window, decimals);
  std::string question = tmpl.question_preamble;
  substitute(question, "placement", metadata.placement);
  substitute(question, "rate_hz", format_number(metadata.rate_hz));
  substitute(question, "duration_s", format_number(metadata.duration_s));
  substitute(question, "series", series);
  substitute(question, "candidate_labels", join_labels(metadata.candidate_labels));

  size_t open = question.find('{');
  if (open != std::string::npos) {
    size_t close = question.find('}', open);
    std::string ph = (close == std::string::npos)
                         ? question.substr(open, 16)
                         : question.substr(open, close - open + 1);
    fail("render: unfilled placeholder " + ph);
  }

  RenderedPrompt rp;
  rp.text = tmpl.instruction + "\n\n" + question + "\n" + tmpl.closing_text();
  rp.variant = tmpl.closing;
  rp.candidate_labels = metadata.candidate_labels;
  rp.window_ref = {window.user_id, window.origin.recording_index, window.origin.start_index,
                   window.label};
  rp.content_hash = sha256_hex(rp.text);

  // every candidate appears exactly once (in the candidates sentence); in
  // particular the truth label never leaks into the rest of the text
  bool truth_listed = false;
  for (const auto& c : metadata.candidate_labels) {
    size_t mentions = count_occurrences(rp.text, c);
    if (mentions != 1) {
      fail("render: candidate '" + c + "' appears " + std::to_string(mentions) +
           " times (want exactly 1)");
    }
    if (to_lower(c) == to_lower(window.label)) truth_listed = true;
  }
  if (!truth_listed) fail("render: truth label missing from candidate list");
  return rp;
}

}  // namespace harbench
