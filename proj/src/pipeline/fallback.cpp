#include <algorithm>
#include <cmath>

#include "deepsound/pipeline.hpp"

namespace deepsound::pipeline {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::direct: return "direct";
    case Strategy::direct_neg: return "direct_neg";
    case Strategy::s3: return "s3";
    case Strategy::s4_rm: return "s4_rm";
    case Strategy::s4_rep: return "s4_rep";
    case Strategy::s4_neg: return "s4_neg";
  }
  return "?";
}

std::string_view display_label(Strategy s) noexcept {
  switch (s) {
    case Strategy::direct: return "Direct";
    case Strategy::direct_neg: return "Direct-neg";
    case Strategy::s3: return "Ours-s3";
    case Strategy::s4_rm: return "Ours-s4-rm";
    case Strategy::s4_rep: return "Ours-s4-rep";
    case Strategy::s4_neg: return "Ours-s4-neg";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  for (auto s : kAllStrategies) {
    if (text == to_string(s) || text == display_label(s)) return s;
  }
  return std::nullopt;
}

bool is_s4(Strategy s) noexcept {
  return s == Strategy::s4_rm || s == Strategy::s4_rep || s == Strategy::s4_neg;
}

void PipelineConfig::validate() const {
  if (!(bar_len > 0.0)) throw Error(ErrorKind::argument, "bar_len must be positive");
  if (!(silence_threshold_dbfs < 0.0)) {
    throw Error(ErrorKind::argument, "silence threshold must be below 0 dBFS");
  }
  if (!(timeout_seconds > 0.0)) throw Error(ErrorKind::argument, "timeout must be positive");
}

cot::CoTStructure generate_structure(std::string_view instruction,
                                     const detect::VideoDescriptor& video, Strategy strategy) {
  std::string flat(instruction);
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::replace(flat.begin(), flat.end(), '\r', ' ');
  if (flat.empty()) flat = kDefaultInstruction;

  std::string scene;
  for (std::size_t i = 0; i < video.scene_tags.size(); ++i) {
    scene += (i ? ", " : " (scene: ") + video.scene_tags[i];
  }
  if (!scene.empty()) scene += ")";

  cot::CoTStructure plan;
  std::string gen = "produce coarse audio for video " + video.id + scene + " following '" + flat + "'";
  if (strategy == Strategy::direct_neg) gen += " with a negative prompt";
  plan.steps.push_back({cot::PlanStep::generate, gen});
  if (strategy == Strategy::direct || strategy == Strategy::direct_neg) return plan;

  plan.steps.push_back({cot::PlanStep::detect,
                        "judge whether the coarse audio carries voice-over given the people on "
                        "screen"});
  plan.steps.push_back({cot::PlanStep::remove, "remove the detected voice-over from the coarse audio"});
  plan.steps.push_back({cot::PlanStep::silence_check,
                        is_s4(strategy) ? "scan bars for silence and apply the " +
                                              std::string(to_string(strategy)) + " fallback"
                                        : std::string("keep the edited audio without a fallback")});
  return plan;
}

bool is_silent(const audio::Waveform& w, detect::TimeSpan bar, double threshold_dbfs) {
  const auto i0 = w.index_at(bar.t0);
  const auto i1 = w.index_at(bar.t1);
  return audio::dbfs(audio::rms(w.samples().subspan(i0, i1 - i0))) < threshold_dbfs;
}

namespace {

std::size_t bar_samples(const audio::Waveform& w, double bar_len) {
  if (!(bar_len > 0.0)) throw Error(ErrorKind::argument, "bar_len must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(bar_len * w.sample_rate())));
}

}  // namespace

std::size_t bar_count(const audio::Waveform& w, double bar_len) {
  const auto b = bar_samples(w, bar_len);
  return (w.size() + b - 1) / b;
}

std::vector<std::size_t> find_silent_bars(const audio::Waveform& w, double bar_len,
                                          double threshold_dbfs) {
  const auto b = bar_samples(w, bar_len);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i * b < w.size(); ++i) {
    const std::size_t len = std::min(b, w.size() - i * b);
    if (audio::dbfs(audio::rms(w.samples().subspan(i * b, len))) < threshold_dbfs) out.push_back(i);
  }
  return out;
}

audio::Waveform apply_fallback(const audio::Waveform& edited, const audio::Waveform& original,
                               const audio::Waveform* negative,
                               const std::vector<std::size_t>& silent_bars, Strategy strategy,
                               double bar_len) {
  if (edited.size() != original.size() || edited.sample_rate() != original.sample_rate()) {
    throw Error(ErrorKind::argument, "edited and original audio differ in shape");
  }
  if ((negative != nullptr) != (strategy == Strategy::s4_neg)) {
    throw Error(ErrorKind::argument, "negative-prompt audio is required for s4_neg and only for it");
  }
  if (negative && negative->size() != edited.size()) {
    throw Error(ErrorKind::argument, "negative-prompt audio length differs from edited audio");
  }
  if (!is_s4(strategy) || silent_bars.empty()) return edited;

  const auto b = bar_samples(edited, bar_len);
  const std::size_t bars = bar_count(edited, bar_len);
  std::vector<bool> silent(bars, false);
  for (auto i : silent_bars) {
    if (i >= bars) throw Error(ErrorKind::argument, "silent bar index out of range");
    silent[i] = true;
  }

  const auto src = edited.samples();
  std::vector<float> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < bars; ++i) {
    const std::size_t start = i * b;
    const std::size_t len = std::min(b, src.size() - start);
    std::span<const float> piece = src.subspan(start, len);
    if (silent[i]) {
      if (strategy == Strategy::s4_rm) continue;
      piece = (strategy == Strategy::s4_rep ? original.samples() : negative->samples())
                  .subspan(start, len);
    }
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return audio::Waveform(std::move(out), edited.sample_rate());
}

}  // namespace deepsound::pipeline
