#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "deepsound/error.hpp"
#include "deepsound/label.hpp"

namespace deepsound::cot {

enum class Section { summary, caption, reasoning, conclusion };

inline constexpr std::array<Section, 4> kSections = {Section::summary, Section::caption,
                                                     Section::reasoning, Section::conclusion};

std::string_view tag_name(Section s) noexcept;

/// Tagged reasoning document: SUMMARY, CAPTION, REASONING (four steps),
/// CONCLUSION ending with an `Answer: <label>` line.
struct CoTDetail {
  std::string summary;
  std::string caption;
  std::array<std::string, 4> reasoning;
  std::string conclusion;  // text preceding the Answer line, may be empty
  VerdictLabel conclusion_label = VerdictLabel::no1;

  bool operator==(const CoTDetail&) const = default;
};

enum class ParseErrorKind {
  missing_tag,
  unclosed_tag,
  misordered_tag,
  duplicate_tag,
  stray_content,
  empty_section,
  step_count,
  step_format,
  missing_answer,
  unknown_label,
  empty_plan,
  plan_format,
  plan_numbering,
  unknown_step,
  duplicate_step,
  step_order,
};

std::string_view to_string(ParseErrorKind kind) noexcept;

/// Structured parse failure. `tag()` names the offending tag (e.g. "CONCLUSION")
/// or plan step where one applies.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::string tag, const std::string& message)
      : Error(ErrorKind::parse, message), kind_(kind), tag_(std::move(tag)) {}

  ParseErrorKind parse_kind() const noexcept { return kind_; }
  const std::string& tag() const noexcept { return tag_; }

 private:
  ParseErrorKind kind_;
  std::string tag_;
};

CoTDetail parse_cot_detail(std::string_view text);
std::string render_cot_detail(const CoTDetail& doc);

/// render(parse(text)); throws ParseError for invalid input.
std::string canonical_cot_detail(std::string_view text);

enum class PlanStep { generate, detect, remove, silence_check };

std::string_view to_string(PlanStep step) noexcept;

struct PlanEntry {
  PlanStep step = PlanStep::generate;
  std::string rationale;

  bool operator==(const PlanEntry&) const = default;
};

/// Ordered pipeline plan, one `Plan k: <step_id> — <rationale>` line per step.
struct CoTStructure {
  std::vector<PlanEntry> steps;

  bool contains(PlanStep step) const noexcept;
  bool operator==(const CoTStructure&) const = default;
};

CoTStructure parse_cot_structure(std::string_view text);
std::string render_cot_structure(const CoTStructure& plan);

/// Throws ParseError if the plan is empty, does not begin with generate,
/// repeats a step or breaks generate < detect < remove < silence_check.
void validate_cot_structure(const CoTStructure& plan);

// Scoring ------------------------------------------------------------------

struct FormatScores {
  double structure = 0.0;  // count of structural violations
  double sm = 0.0;
  double cp = 0.0;
  double rn = 0.0;
  double cc = 0.0;

  double total() const noexcept { return structure + sm + cp + rn + cc; }
};

struct KeywordScores {
  double cp = 0.0;
  double rn = 0.0;
  double cc = 0.0;

  double sum() const noexcept { return cp + rn + cc; }
};

struct CoTScores {
  double format_total = 0.0;
  double format_structure = 0.0;
  double format_sm = 0.0;
  double format_cp = 0.0;
  double format_rn = 0.0;
  double format_cc = 0.0;
  double keyword_cp = 0.0;
  double keyword_rn = 0.0;
  double keyword_cc = 0.0;
  double total = 0.0;
};

const std::vector<std::string>& default_lexicon();

/// Lowercase, split on non-alphanumerics.
std::vector<std::string> tokenize(std::string_view text);

std::size_t token_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

/// Edit distance divided by the longer token count; 0 when both are empty.
double normalized_edit_distance(std::string_view a, std::string_view b);

/// Candidate given as raw text so that malformed documents still score.
FormatScores format_score(std::string_view candidate_text, const CoTDetail& gold);
FormatScores format_score(const CoTDetail& candidate, const CoTDetail& gold);

KeywordScores keyword_score(std::string_view candidate_text, const CoTDetail& gold,
                            const std::vector<std::string>& lexicon = default_lexicon());
KeywordScores keyword_score(const CoTDetail& candidate, const CoTDetail& gold,
                            const std::vector<std::string>& lexicon = default_lexicon());

CoTScores cot_total_score(std::string_view candidate_text, const CoTDetail& gold,
                          const std::vector<std::string>& lexicon = default_lexicon());
CoTScores cot_total_score(const CoTDetail& candidate, const CoTDetail& gold,
                          const std::vector<std::string>& lexicon = default_lexicon());

}  // namespace deepsound::cot
