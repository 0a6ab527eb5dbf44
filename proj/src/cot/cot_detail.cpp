#include <algorithm>
#include <charconv>
#include <optional>

#include "deepsound/cot.hpp"
#include "util/text.hpp"

namespace deepsound::cot {

std::string_view tag_name(Section s) noexcept {
  switch (s) {
    case Section::summary: return "SUMMARY";
    case Section::caption: return "CAPTION";
    case Section::reasoning: return "REASONING";
    case Section::conclusion: return "CONCLUSION";
  }
  return "?";
}

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::missing_tag: return "missing_tag";
    case ParseErrorKind::unclosed_tag: return "unclosed_tag";
    case ParseErrorKind::misordered_tag: return "misordered_tag";
    case ParseErrorKind::duplicate_tag: return "duplicate_tag";
    case ParseErrorKind::stray_content: return "stray_content";
    case ParseErrorKind::empty_section: return "empty_section";
    case ParseErrorKind::step_count: return "step_count";
    case ParseErrorKind::step_format: return "step_format";
    case ParseErrorKind::missing_answer: return "missing_answer";
    case ParseErrorKind::unknown_label: return "unknown_label";
    case ParseErrorKind::empty_plan: return "empty_plan";
    case ParseErrorKind::plan_format: return "plan_format";
    case ParseErrorKind::plan_numbering: return "plan_numbering";
    case ParseErrorKind::unknown_step: return "unknown_step";
    case ParseErrorKind::duplicate_step: return "duplicate_step";
    case ParseErrorKind::step_order: return "step_order";
  }
  return "?";
}

namespace {

struct TagToken {
  std::size_t pos = 0;
  std::size_t end = 0;
  std::size_t section = 0;
  bool closing = false;
};

std::vector<TagToken> scan_tags(std::string_view text) {
  std::vector<TagToken> tokens;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    const std::string name(tag_name(kSections[s]));
    for (bool closing : {false, true}) {
      const std::string token = closing ? "</" + name + ">" : "<" + name + ">";
      for (auto p = text.find(token); p != std::string_view::npos;
           p = text.find(token, p + token.size())) {
        tokens.push_back({p, p + token.size(), s, closing});
      }
    }
  }
  std::sort(tokens.begin(), tokens.end(),
            [](const TagToken& a, const TagToken& b) { return a.pos < b.pos; });
  return tokens;
}

[[noreturn]] void fail(ParseErrorKind kind, std::size_t section, const std::string& msg) {
  throw ParseError(kind, std::string(tag_name(kSections[section])), msg);
}

std::string tag_str(std::size_t section) { return std::string(tag_name(kSections[section])); }

// Returns the step number if `line` starts with "Step <n>.", and the rest.
std::optional<std::pair<int, std::string_view>> match_step(std::string_view line) {
  constexpr std::string_view prefix = "Step ";
  if (!line.starts_with(prefix)) return std::nullopt;
  std::string_view rest = line.substr(prefix.size());
  int number = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), number);
  if (ec != std::errc() || ptr == rest.data()) return std::nullopt;
  rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
  if (rest.empty() || rest.front() != '.') return std::nullopt;
  rest.remove_prefix(1);
  if (!rest.empty() && !util::is_space(rest.front())) return std::nullopt;
  return std::make_pair(number, util::trim(rest));
}

std::array<std::string, 4> parse_steps(std::string_view body) {
  constexpr std::size_t kReasoning = 2;
  std::vector<std::string> steps;
  for (auto line : util::split_lines(body)) {
    if (auto step = match_step(line)) {
      const int expected = static_cast<int>(steps.size()) + 1;
      if (step->first != expected) {
        fail(ParseErrorKind::step_format, kReasoning,
             "REASONING: found Step " + std::to_string(step->first) + ", expected Step " +
                 std::to_string(expected));
      }
      steps.emplace_back(step->second);
    } else if (steps.empty()) {
      if (!util::is_blank(line)) {
        fail(ParseErrorKind::step_format, kReasoning, "REASONING: text before Step 1");
      }
    } else {
      steps.back() += '\n';
      steps.back() += line;
    }
  }
  if (steps.size() != 4) {
    fail(ParseErrorKind::step_count, kReasoning,
         "REASONING: expected 4 steps, found " + std::to_string(steps.size()));
  }
  std::array<std::string, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = std::string(util::trim(steps[i]));
    if (out[i].empty()) {
      fail(ParseErrorKind::step_format, kReasoning,
           "REASONING: Step " + std::to_string(i + 1) + " is empty");
    }
  }
  return out;
}

void parse_conclusion(std::string_view body, CoTDetail& doc) {
  constexpr std::size_t kConclusion = 3;
  auto lines = util::split_lines(body);
  while (!lines.empty() && util::is_blank(lines.back())) lines.pop_back();
  constexpr std::string_view answer = "Answer:";
  if (lines.empty() || !util::trim(lines.back()).starts_with(answer)) {
    fail(ParseErrorKind::missing_answer, kConclusion,
         "CONCLUSION: missing terminal 'Answer: <label>' line");
  }
  const auto label_text = util::trim(util::trim(lines.back()).substr(answer.size()));
  const auto label = parse_label(label_text);
  if (!label) {
    fail(ParseErrorKind::unknown_label, kConclusion,
         "CONCLUSION: unknown label '" + std::string(label_text) + "'");
  }
  doc.conclusion_label = *label;
  std::string text;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    if (i) text += '\n';
    text += lines[i];
  }
  doc.conclusion = std::string(util::trim(text));
}

}  // namespace

CoTDetail parse_cot_detail(std::string_view raw) {
  const std::string text = util::normalize_newlines(raw);
  const std::string_view view(text);
  const auto tokens = scan_tags(view);

  std::array<std::string_view, 4> bodies;
  std::size_t cursor = 0;
  std::size_t text_pos = 0;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    if (cursor >= tokens.size()) {
      fail(ParseErrorKind::missing_tag, s, "missing <" + tag_str(s) + "> section");
    }
    const auto& open = tokens[cursor];
    if (open.section < s) {
      fail(ParseErrorKind::duplicate_tag, open.section,
           "duplicate <" + tag_str(open.section) + "> tag");
    }
    if (open.section != s || open.closing) {
      if (open.section == s) {
        fail(ParseErrorKind::missing_tag, s, "missing opening <" + tag_str(s) + "> tag");
      }
      const bool later = std::any_of(tokens.begin() + static_cast<std::ptrdiff_t>(cursor),
                                     tokens.end(),
                                     [s](const TagToken& t) { return t.section == s; });
      if (later) {
        fail(ParseErrorKind::misordered_tag, open.section,
             "<" + tag_str(open.section) + "> appears before <" + tag_str(s) + ">");
      }
      fail(ParseErrorKind::missing_tag, s, "missing <" + tag_str(s) + "> section");
    }
    if (!util::is_blank(view.substr(text_pos, open.pos - text_pos))) {
      fail(ParseErrorKind::stray_content, s, "unexpected text before <" + tag_str(s) + ">");
    }
    if (cursor + 1 >= tokens.size() || tokens[cursor + 1].section != s ||
        !tokens[cursor + 1].closing) {
      fail(ParseErrorKind::unclosed_tag, s, "<" + tag_str(s) + "> is not closed");
    }
    const auto& close = tokens[cursor + 1];
    bodies[s] = util::trim(view.substr(open.end, close.pos - open.end));
    if (bodies[s].empty()) {
      fail(ParseErrorKind::empty_section, s, "<" + tag_str(s) + "> section is empty");
    }
    text_pos = close.end;
    cursor += 2;
  }
  if (cursor < tokens.size()) {
    const auto& extra = tokens[cursor];
    fail(ParseErrorKind::duplicate_tag, extra.section,
         "duplicate <" + tag_str(extra.section) + "> tag");
  }
  if (!util::is_blank(view.substr(text_pos))) {
    fail(ParseErrorKind::stray_content, 3, "unexpected text after </CONCLUSION>");
  }

  CoTDetail doc;
  doc.summary = std::string(bodies[0]);
  doc.caption = std::string(bodies[1]);
  doc.reasoning = parse_steps(bodies[2]);
  parse_conclusion(bodies[3], doc);
  return doc;
}

std::string render_cot_detail(const CoTDetail& doc) {
  std::string out;
  out += "<SUMMARY>\n" + doc.summary + "\n</SUMMARY>\n";
  out += "<CAPTION>\n" + doc.caption + "\n</CAPTION>\n";
  out += "<REASONING>\n";
  for (std::size_t i = 0; i < doc.reasoning.size(); ++i) {
    out += "Step " + std::to_string(i + 1) + ". " + doc.reasoning[i] + "\n";
  }
  out += "</REASONING>\n";
  out += "<CONCLUSION>\n";
  if (!doc.conclusion.empty()) out += doc.conclusion + "\n";
  out += "Answer: ";
  out += to_string(doc.conclusion_label);
  out += "\n</CONCLUSION>\n";
  return out;
}

std::string canonical_cot_detail(std::string_view text) {
  return render_cot_detail(parse_cot_detail(text));
}

}  // namespace deepsound::cot
