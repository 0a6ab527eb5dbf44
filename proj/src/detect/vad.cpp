#include <algorithm>
#include <cmath>

#include "deepsound/detect.hpp"

namespace deepsound::detect {
namespace {

constexpr double kEps = 1e-12;
constexpr double kMinPitchHz = 80.0;
constexpr double kMaxPitchHz = 400.0;

double band_ratio(std::span<const float> frame, int sample_rate) {
  const std::size_t n = audio::next_power_of_two(frame.size());
  const auto window = audio::hann(frame.size());
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * window[i];
  audio::fft(buf);
  double in_band = 0.0, total = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double p = std::norm(buf[k]);
    const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    total += p;
    if (hz >= kVoiceBand.low_hz && hz <= kVoiceBand.high_hz) in_band += p;
  }
  return in_band / (total + kEps);
}

// max over pitch lags of sum x[n]x[n+lag] / sqrt(E_head * E_tail)
double harmonicity(std::span<const float> frame, int sample_rate) {
  const std::size_t len = frame.size();
  double mean = 0.0;
  for (float s : frame) mean += s;
  mean /= static_cast<double>(len);

  std::vector<double> x(len);
  for (std::size_t i = 0; i < len; ++i) x[i] = frame[i] - mean;
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  if (prefix[len] <= kEps) return 0.0;

  const std::size_t n = audio::next_power_of_two(2 * len);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < len; ++i) buf[i] = x[i];
  audio::fft(buf);
  for (auto& v : buf) v = std::norm(v);
  audio::fft(buf, true);

  const auto min_lag = static_cast<std::size_t>(std::ceil(sample_rate / kMaxPitchHz));
  const auto max_lag = std::min<std::size_t>(
      len - 1, static_cast<std::size_t>(std::floor(sample_rate / kMinPitchHz)));
  double best = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    const double head = prefix[len - lag];
    const double tail = prefix[len] - prefix[lag];
    const double denom = std::sqrt(head * tail);
    if (denom <= kEps) continue;
    best = std::max(best, buf[lag].real() / denom);
  }
  return best;
}

}  // namespace

std::vector<TimeSpan> normalize_spans(std::vector<TimeSpan> spans, double duration) {
  std::vector<TimeSpan> clipped;
  for (auto s : spans) {
    s.t0 = std::max(0.0, s.t0);
    s.t1 = std::min(duration, s.t1);
    if (s.t1 > s.t0) clipped.push_back(s);
  }
  std::sort(clipped.begin(), clipped.end(),
            [](const TimeSpan& a, const TimeSpan& b) { return a.t0 < b.t0; });
  std::vector<TimeSpan> merged;
  for (const auto& s : clipped) {
    if (!merged.empty() && s.t0 <= merged.back().t1) {
      merged.back().t1 = std::max(merged.back().t1, s.t1);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

FrameFeatures analyze_frame(std::span<const float> frame, int sample_rate) {
  FrameFeatures f;
  if (frame.empty()) return f;
  f.band_ratio = band_ratio(frame, sample_rate);
  f.harmonicity = harmonicity(frame, sample_rate);
  return f;
}

std::vector<FrameFeatures> analyze_frames(const audio::Waveform& w) {
  std::vector<FrameFeatures> out;
  if (w.empty()) return out;
  const auto frame_len =
      static_cast<std::size_t>(std::llround(kFrameSeconds * w.sample_rate()));
  const auto samples = w.samples();
  const double sr = w.sample_rate();
  for (std::size_t start = 0; start + frame_len <= samples.size(); start += frame_len) {
    auto f = analyze_frame(samples.subspan(start, frame_len), w.sample_rate());
    f.t0 = start / sr;
    f.t1 = (start + frame_len) / sr;
    out.push_back(f);
  }
  return out;
}

std::vector<TimeSpan> segments_from_frames(const std::vector<FrameFeatures>& frames,
                                           const DetectorProfile& profile) {
  std::vector<TimeSpan> raw;
  for (const auto& f : frames) {
    const bool active = f.band_ratio >= profile.band_ratio && f.harmonicity >= profile.harmonicity;
    if (!active) continue;
    if (!raw.empty() && std::abs(raw.back().t1 - f.t0) < 1e-9) {
      raw.back().t1 = f.t1;
    } else {
      raw.push_back({f.t0, f.t1});
    }
  }
  std::vector<TimeSpan> out;
  for (const auto& s : raw) {
    if (s.length() + 1e-9 >= profile.min_segment) out.push_back(s);
  }
  return out;
}

std::vector<TimeSpan> detect_voice_activity(const audio::Waveform& w,
                                            const DetectorProfile& profile) {
  return segments_from_frames(analyze_frames(w), profile);
}

}  // namespace deepsound::detect
