#include <algorithm>
#include <cmath>
#include <numbers>

#include "deepsound/pipeline.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace deepsound::pipeline {
namespace {

constexpr int kHarmonics = 5;
constexpr double kBurstDecay = 0.030;
constexpr double kVoiceFade = 0.010;

double from_db(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

audio::Waveform stub_v2a(const detect::VideoDescriptor& video, std::string_view prompt,
                         const std::optional<std::string>& negative_prompt, std::uint64_t seed) {
  const int sr = audio::kCanonicalRate;
  const auto n = static_cast<std::size_t>(std::llround(video.duration * sr));
  std::vector<double> out(n, 0.0);
  util::Rng rng(util::mix_seed(seed, util::fnv1a(video.id)));

  const double ambience = from_db(kStubAmbienceDbfs) * std::sqrt(3.0);
  for (auto& s : out) s = rng.uniform(-ambience, ambience);

  const auto burst_len = static_cast<std::size_t>(std::llround(kStubBurstSeconds * sr));
  for (double onset : video.onset_times) {
    const auto start = static_cast<std::size_t>(std::llround(onset * sr));
    for (std::size_t i = 0; i < burst_len && start + i < n; ++i) {
      const double t = static_cast<double>(i) / sr;
      out[start + i] += kStubBurstPeak * std::exp(-t / kBurstDecay) * rng.uniform(-1.0, 1.0);
    }
  }

  const bool asks_voice = !video.person_segments.empty() || util::contains_ci(prompt, "voice");
  const bool suppressed = negative_prompt && util::contains_ci(*negative_prompt, "voice");
  if (asks_voice && !suppressed) {
    std::array<double, kHarmonics> phase{};
    double power = 0.0;
    for (int k = 0; k < kHarmonics; ++k) {
      phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      power += 0.5 / ((k + 1.0) * (k + 1.0));
    }
    const double scale = from_db(kStubVoiceDbfs) / std::sqrt(power);
    auto spans = video.person_segments.empty()
                     ? std::vector<detect::TimeSpan>{{0.0, video.duration}}
                     : detect::normalize_spans(video.person_segments, video.duration);
    for (const auto& span : spans) {
      const auto i0 = static_cast<std::size_t>(std::llround(span.t0 * sr));
      const auto i1 = std::min(n, static_cast<std::size_t>(std::llround(span.t1 * sr)));
      for (std::size_t i = i0; i < i1; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double edge = std::min(t - span.t0, span.t1 - t);
        const double fade =
            edge < kVoiceFade ? 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kVoiceFade) : 1.0;
        double v = 0.0;
        for (int k = 0; k < kHarmonics; ++k) {
          v += std::sin(2.0 * std::numbers::pi * kStubVoiceF0 * (k + 1) * t +
                        phase[static_cast<std::size_t>(k)]) /
               (k + 1.0);
        }
        out[i] += scale * fade * v;
      }
    }
  }

  std::vector<float> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = static_cast<float>(std::clamp(out[i], -1.0, 1.0));
  return audio::Waveform(std::move(samples), sr);
}

audio::Waveform StubBackend::generate(const V2ARequest& request) const {
  return stub_v2a(request.video, request.prompt, request.negative_prompt, request.seed);
}

}  // namespace deepsound::pipeline
