#include <charconv>

#include "deepsound/cot.hpp"
#include "util/text.hpp"

namespace deepsound::cot {
namespace {

// " — " (U+2014 EM DASH, UTF-8).
constexpr std::string_view kSeparator = " \xE2\x80\x94 ";
constexpr std::string_view kPrefix = "Plan ";

constexpr std::array<PlanStep, 4> kPlanSteps = {PlanStep::generate, PlanStep::detect,
                                                PlanStep::remove, PlanStep::silence_check};

std::optional<PlanStep> parse_step(std::string_view id) {
  for (auto step : kPlanSteps) {
    if (to_string(step) == id) return step;
  }
  return std::nullopt;
}

[[noreturn]] void fail(ParseErrorKind kind, std::string_view step, const std::string& msg) {
  throw ParseError(kind, std::string(step), msg);
}

}  // namespace

std::string_view to_string(PlanStep step) noexcept {
  switch (step) {
    case PlanStep::generate: return "generate";
    case PlanStep::detect: return "detect";
    case PlanStep::remove: return "remove";
    case PlanStep::silence_check: return "silence_check";
  }
  return "?";
}

bool CoTStructure::contains(PlanStep step) const noexcept {
  for (const auto& e : steps) {
    if (e.step == step) return true;
  }
  return false;
}

void validate_cot_structure(const CoTStructure& plan) {
  if (plan.steps.empty()) fail(ParseErrorKind::empty_plan, "", "plan has no steps");
  if (plan.steps.front().step != PlanStep::generate) {
    fail(ParseErrorKind::step_order, to_string(plan.steps.front().step),
         "plan must begin with generate");
  }
  std::array<bool, 4> seen{};
  int prev = -1;
  for (const auto& e : plan.steps) {
    const int rank = static_cast<int>(e.step);
    if (seen[static_cast<std::size_t>(rank)]) {
      fail(ParseErrorKind::duplicate_step, to_string(e.step),
           "duplicate plan step " + std::string(to_string(e.step)));
    }
    seen[static_cast<std::size_t>(rank)] = true;
    if (rank < prev) {
      fail(ParseErrorKind::step_order, to_string(e.step),
           std::string(to_string(e.step)) + " is out of order");
    }
    prev = rank;
  }
}

CoTStructure parse_cot_structure(std::string_view raw) {
  const std::string text = util::normalize_newlines(raw);
  CoTStructure plan;
  for (auto line : util::split_lines(text)) {
    line = util::trim(line);
    if (line.empty()) continue;
    if (!line.starts_with(kPrefix)) {
      fail(ParseErrorKind::plan_format, "", "expected 'Plan k: <step> — <rationale>'");
    }
    std::string_view rest = line.substr(kPrefix.size());
    int number = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), number);
    if (ec != std::errc() || ptr == rest.data()) {
      fail(ParseErrorKind::plan_format, "", "missing plan number");
    }
    rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    if (!rest.starts_with(": ")) fail(ParseErrorKind::plan_format, "", "expected ': ' after plan number");
    rest.remove_prefix(2);
    const auto sep = rest.find(kSeparator);
    if (sep == std::string_view::npos) {
      fail(ParseErrorKind::plan_format, "", "missing ' — ' between step and rationale");
    }
    const auto id = rest.substr(0, sep);
    const auto rationale = util::trim(rest.substr(sep + kSeparator.size()));
    const int expected = static_cast<int>(plan.steps.size()) + 1;
    if (number != expected) {
      fail(ParseErrorKind::plan_numbering, id,
           "found Plan " + std::to_string(number) + ", expected Plan " + std::to_string(expected));
    }
    const auto step = parse_step(id);
    if (!step) fail(ParseErrorKind::unknown_step, id, "unknown plan step '" + std::string(id) + "'");
    if (rationale.empty()) fail(ParseErrorKind::plan_format, id, "empty rationale");
    plan.steps.push_back({*step, std::string(rationale)});
  }
  validate_cot_structure(plan);
  return plan;
}

std::string render_cot_structure(const CoTStructure& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    out += std::string(kPrefix) + std::to_string(i + 1) + ": ";
    out += to_string(plan.steps[i].step);
    out += kSeparator;
    out += plan.steps[i].rationale;
    out += '\n';
  }
  return out;
}

}  // namespace deepsound::cot
