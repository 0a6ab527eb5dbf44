#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepsound/audio.hpp"
#include "deepsound/cot.hpp"
#include "deepsound/label.hpp"

namespace deepsound::detect {

/// Frequency range treated as human voice by the detector and the remover.
inline constexpr audio::Band kVoiceBand{200.0, 3400.0};

struct TimeSpan {
  double t0 = 0.0;
  double t1 = 0.0;

  double length() const noexcept { return t1 - t0; }
  bool operator==(const TimeSpan&) const = default;
};

/// Sorts, clips to [0, duration] and merges overlapping spans.
std::vector<TimeSpan> normalize_spans(std::vector<TimeSpan> spans, double duration);

/// Stand-in for decoded video: declared person visibility and visual events.
struct VideoDescriptor {
  std::string id;
  double duration = 0.0;
  std::vector<TimeSpan> person_segments;
  std::vector<std::string> scene_tags;
  std::vector<double> onset_times;

  bool operator==(const VideoDescriptor&) const = default;
};

/// Throws Error(argument) on segments outside [0, duration] or unsorted onsets.
void validate(const VideoDescriptor& video);

VideoDescriptor parse_descriptor(std::string_view json_text);
std::string descriptor_to_json(const VideoDescriptor& video);
VideoDescriptor read_descriptor(const std::filesystem::path& path);
void write_descriptor(const std::filesystem::path& path, const VideoDescriptor& video);

/// Threshold set for the frame-level voice activity decision.
struct DetectorProfile {
  double band_ratio = 0.6;     // voice-band energy / total energy
  double harmonicity = 0.5;    // normalized autocorrelation peak, 80-400 Hz lags
  double min_segment = 0.200;  // seconds

  static constexpr DetectorProfile qa() { return {0.6, 0.5, 0.200}; }
  static constexpr DetectorProfile cot() { return {0.5, 0.5, 0.120}; }
};

inline constexpr double kFrameSeconds = 0.100;

struct FrameFeatures {
  double t0 = 0.0;
  double t1 = 0.0;
  double band_ratio = 0.0;
  double harmonicity = 0.0;
};

/// Band ratio and harmonicity for each non-overlapping 100 ms frame.
std::vector<FrameFeatures> analyze_frames(const audio::Waveform& w);

/// Band ratio and harmonicity of a single frame of samples.
FrameFeatures analyze_frame(std::span<const float> frame, int sample_rate);

std::vector<TimeSpan> detect_voice_activity(const audio::Waveform& w,
                                            const DetectorProfile& profile = DetectorProfile::qa());

std::vector<TimeSpan> segments_from_frames(const std::vector<FrameFeatures>& frames,
                                           const DetectorProfile& profile);

VerdictLabel classify_voiceover(bool person_present, bool voice_present) noexcept;

enum class Mode { qa, cot };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

struct VoiceOverVerdict {
  VerdictLabel label = VerdictLabel::no1;
  bool person_present = false;
  bool voice_present = false;
  std::vector<TimeSpan> voiced_segments;
  Mode mode = Mode::qa;
  std::optional<cot::CoTDetail> cot;
};

inline constexpr double kPersonCoverage = 0.05;
inline constexpr double kAlignmentTolerance = 0.5;

bool person_present(const VideoDescriptor& video);

/// Four-step reasoning document for the given evidence; the conclusion
/// label is classify_voiceover(person, voice).
cot::CoTDetail build_verdict_cot(bool person, bool voice,
                                 const std::vector<std::string>& scene_tags);

VoiceOverVerdict judge(const VideoDescriptor& video, const audio::Waveform& audio, Mode mode);

/// Energy inside the voiced spans over total energy; 0 for silent input.
double voice_energy_ratio(const audio::Waveform& w, const std::vector<TimeSpan>& voiced);

}  // namespace deepsound::detect
