#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "deepsound/audio.hpp"
#include "deepsound/cot.hpp"
#include "deepsound/detect.hpp"
#include "deepsound/label.hpp"

namespace deepsound::dataset {

/// Proportions for Yes, No1, No2, No3 in that order.
using LabelMix = std::array<double, 4>;
using LabelCounts = std::array<std::size_t, 4>;

inline constexpr LabelMix kUniformMix{0.25, 0.25, 0.25, 0.25};
inline constexpr std::size_t kDefaultCorpusSize = 180;
inline constexpr double kDefaultItemDuration = 5.0;

/// Paths are relative to the manifest directory.
struct CorpusItem {
  std::string id;
  std::filesystem::path descriptor;
  std::filesystem::path audio;
  std::filesystem::path cot;
  VerdictLabel gold_label = VerdictLabel::no1;
  bool borderline = false;

  bool operator==(const CorpusItem&) const = default;
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  std::vector<CorpusItem> items;
  LabelCounts counts{};
  std::filesystem::path root;  // manifest directory; not serialised

  std::filesystem::path resolve(const std::filesystem::path& rel) const { return root / rel; }
  bool operator==(const CorpusManifest& o) const {
    return seed == o.seed && items == o.items && counts == o.counts;
  }
};

/// Largest-remainder rounding of n * mix; ties go to the earlier label.
LabelCounts allocate_labels(std::size_t n, const LabelMix& mix);

struct SynthItem {
  detect::VideoDescriptor video;
  audio::Waveform audio;
  cot::CoTDetail gold;
};

/// Descriptor, stub audio and gold reasoning for one labelled item. Voice is
/// present iff the label is Yes or No2; people iff No2 or No3.
SynthItem synthesize_item(const std::string& id, VerdictLabel label, std::uint64_t seed,
                          double duration = kDefaultItemDuration);

/// Voice-over item that only the CoT detector profile catches: ambience plus a
/// 150 ms frame-aligned harmonic burst with voice-band energy ratio 0.55.
SynthItem synthesize_borderline_item(const std::string& id, std::uint64_t seed,
                                     double duration = kDefaultItemDuration);

inline constexpr double kBorderlineBandRatio = 0.55;
inline constexpr double kBorderlineSeconds = 0.150;

struct CorpusOptions {
  std::size_t borderline = 0;  // extra Yes items drawn from synthesize_borderline_item
  double duration = kDefaultItemDuration;
};

/// Writes <out_dir>/<id>/{descriptor.json,audio.wav,cot.txt} per item and
/// <out_dir>/manifest.json. The label mix applies to the n - borderline
/// regular items. Throws Error(argument) for an invalid mix or n < 4.
CorpusManifest build_corpus(std::size_t n, const LabelMix& mix, std::uint64_t seed,
                            const std::filesystem::path& out_dir, const CorpusOptions& options = {});

LabelMix parse_mix(std::string_view text);

std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& root = {});
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

enum class ViolationKind { missing_file, bad_descriptor, bad_cot, label_mismatch, duplicate_id, count_mismatch };

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string id;  // empty for manifest-level violations
  std::string message;
};

/// Empty result means valid. Throws Error(io) if the manifest cannot be read.
std::vector<Violation> validate_manifest(const std::filesystem::path& path);

struct LabelStats {
  LabelCounts counts{};
  std::array<double, 4> proportions{};
  std::size_t total = 0;
};

LabelStats label_stats(const CorpusManifest& manifest);

}  // namespace deepsound::dataset
