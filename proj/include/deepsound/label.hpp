#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace deepsound {

/// Voice-over taxonomy. Yes: voice without a visible person. No1: neither.
/// No2: person and voice. No3: person without voice.
enum class VerdictLabel { yes, no1, no2, no3 };

inline constexpr std::array<VerdictLabel, 4> kAllLabels = {
    VerdictLabel::yes, VerdictLabel::no1, VerdictLabel::no2, VerdictLabel::no3};

constexpr std::string_view to_string(VerdictLabel label) noexcept {
  switch (label) {
    case VerdictLabel::yes: return "Yes";
    case VerdictLabel::no1: return "No1";
    case VerdictLabel::no2: return "No2";
    case VerdictLabel::no3: return "No3";
  }
  return "?";
}

constexpr std::optional<VerdictLabel> parse_label(std::string_view text) noexcept {
  for (auto label : kAllLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

constexpr std::size_t label_index(VerdictLabel label) noexcept {
  return static_cast<std::size_t>(label);
}

}  // namespace deepsound
