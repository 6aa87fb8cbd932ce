#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "harbench/parse.hpp"
#include "harbench/rng.hpp"
#include "harbench/util.hpp"

using namespace harbench;
namespace fs = std::filesystem;

namespace {

LabelSchema schema_by_name(const std::string& name) {
  return name == "hhar" ? hhar_schema() : capture24_schema();
}

struct Fixture {
  std::string name;
  std::string text;
  LabelSchema schema;
  std::string expected_kind;  // label | ambiguous | noanswer
  std::string expected_payload;
};

std::vector<Fixture> load_fixtures() {
  std::vector<Fixture> out;
  fs::path dir = fs::path(HARBENCH_FIXTURE_DIR) / "transcripts";
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& txt : files) {
    Fixture f;
    f.name = txt.stem().string();
    f.text = read_file(txt);
    auto lines = split(read_file(fs::path(txt).replace_extension(".expected")), '\n');
    REQUIRE(lines.size() >= 2);
    auto schema_parts = split(lines[0], ' ');
    REQUIRE(schema_parts[0] == "schema");
    f.schema = schema_by_name(schema_parts[1]);
    auto outcome_parts = split(lines[1], ' ');
    f.expected_kind = outcome_parts[0];
    if (outcome_parts.size() > 1) f.expected_payload = outcome_parts[1];
    out.push_back(std::move(f));
  }
  return out;
}

// a Label's surface form (canonical or synonym) must sit inside the span
bool span_mentions(const std::string& text, const ParsedAnswer& a) {
  std::string span = to_lower(text.substr(a.evidence_begin,
                                          a.evidence_end - a.evidence_begin));
  for (const auto& [surface, canonical] : label_synonyms()) {
    if (canonical == a.label && span.find(surface) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("fixture corpus parses to its annotated outcomes") {
  auto fixtures = load_fixtures();
  REQUIRE(fixtures.size() >= 12);
  for (const auto& f : fixtures) {
    CAPTURE(f.name);
    ParsedAnswer a = parse_answer(f.text, f.schema);
    if (f.expected_kind == "label") {
      REQUIRE(a.kind == AnswerKind::label);
      CHECK(a.label == f.expected_payload);
      CHECK(f.schema.contains(a.label));
      CHECK(a.evidence_end <= f.text.size());
      CHECK(a.evidence_begin < a.evidence_end);
      CHECK(span_mentions(f.text, a));
    } else if (f.expected_kind == "ambiguous") {
      REQUIRE(a.kind == AnswerKind::ambiguous);
      auto expected = split(f.expected_payload, ',');
      REQUIRE(a.candidates.size() == expected.size());
      for (const auto& c : expected) {
        CHECK(std::find(a.candidates.begin(), a.candidates.end(), c) !=
              a.candidates.end());
      }
    } else {
      REQUIRE(a.kind == AnswerKind::no_answer);
    }
  }
}

TEST_CASE("evidence span points at the decisive sentence") {
  std::string text = "Sleep is flat. Walking is rhythmic. The person is most likely walking.";
  ParsedAnswer a = parse_answer(text, capture24_schema());
  REQUIRE(a.kind == AnswerKind::label);
  CHECK(a.label == "walking");
  std::string span = text.substr(a.evidence_begin, a.evidence_end - a.evidence_begin);
  CHECK(span.find("most likely") != std::string::npos);
  CHECK(span.find("Sleep is flat") == std::string::npos);
}

TEST_CASE("numbers with decimal points do not break sentence splitting") {
  std::string text = "The peak sits at 1.5 Hz with variance 0.42. Answer: walking";
  ParsedAnswer a = parse_answer(text, capture24_schema());
  REQUIRE(a.kind == AnswerKind::label);
  CHECK(a.label == "walking");
}

TEST_CASE("empty-ish and label-free inputs give no answer") {
  CHECK(parse_answer(" ", capture24_schema()).kind == AnswerKind::no_answer);
  CHECK(parse_answer("interesting data!", capture24_schema()).kind ==
        AnswerKind::no_answer);
}

TEST_CASE("schema filtering: labels outside the active schema are invisible") {
  // the stairs mention is noise under the 4-class schema
  std::string text = "This is not upstairs. The person is most likely sleep.";
  ParsedAnswer a = parse_answer(text, capture24_schema());
  REQUIRE(a.kind == AnswerKind::label);
  CHECK(a.label == "sleep");
}

TEST_CASE("score_outcome: modes") {
  ParsedAnswer label_walking{AnswerKind::label, "walking", {}, 0, 1};
  ParsedAnswer ambiguous{AnswerKind::ambiguous, "", {"upstairs", "downstairs"}, 0, 1};
  ParsedAnswer none{AnswerKind::no_answer, "", {}, 0, 0};
  auto schema = capture24_schema();

  CHECK(score_outcome(label_walking, "walking", schema, ScoringMode::abstain) ==
        Outcome::correct);
  CHECK(score_outcome(label_walking, "sleep", schema, ScoringMode::abstain) ==
        Outcome::incorrect);
  CHECK(score_outcome(ambiguous, "walking", schema, ScoringMode::strict) ==
        Outcome::incorrect);
  CHECK(score_outcome(ambiguous, "walking", schema, ScoringMode::abstain) ==
        Outcome::abstain);
  CHECK(score_outcome(none, "sleep", schema, ScoringMode::abstain) == Outcome::abstain);
  CHECK(score_outcome(none, "sleep", schema, ScoringMode::strict) == Outcome::incorrect);
  CHECK_THROWS_AS(score_outcome(none, "jogging", schema, ScoringMode::abstain), Error);
}

TEST_CASE("totality: random byte soup always yields a valid outcome") {
  std::mt19937_64 gen(606);
  auto schema = capture24_schema();
  for (int trial = 0; trial < 20000; ++trial) {
    size_t len = uniform_index(gen, 200);
    std::string s;
    for (size_t i = 0; i < len; ++i) {
      s.push_back(static_cast<char>(gen() & 0xff));
    }
    if (s.empty()) s = "x";
    ParsedAnswer a = parse_answer(s, schema);
    if (a.kind == AnswerKind::label) {
      REQUIRE(schema.contains(a.label));
      REQUIRE(a.evidence_end <= s.size());
    }
    if (a.kind == AnswerKind::ambiguous) REQUIRE(a.candidates.size() >= 2);
  }
}
