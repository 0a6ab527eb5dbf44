#include <algorithm>
#include <cmath>

#include "deepsound/audio.hpp"

namespace deepsound {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::format: return "format";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::shape: return "shape";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::backend: return "backend";
    case ErrorKind::insufficient_samples: return "insufficient_samples";
    case ErrorKind::normalization: return "normalization";
    case ErrorKind::pairing: return "pairing";
  }
  return "unknown";
}

}  // namespace deepsound

namespace deepsound::audio {

Waveform::Waveform(std::vector<float> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) {
    throw Error(ErrorKind::argument, "sample rate must be positive");
  }
  if (!std::all_of(samples_.begin(), samples_.end(),
                   [](float s) { return std::isfinite(s); })) {
    throw Error(ErrorKind::argument, "waveform contains non-finite samples");
  }
}

Waveform Waveform::zeros(std::size_t n, int sample_rate) {
  return Waveform(std::vector<float>(n, 0.0f), sample_rate);
}

std::size_t Waveform::index_at(double seconds) const noexcept {
  if (seconds <= 0.0) return 0;
  const double idx = std::round(seconds * sample_rate_);
  if (idx >= static_cast<double>(samples_.size())) return samples_.size();
  return static_cast<std::size_t>(idx);
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw Error(ErrorKind::argument, "target rate must be positive");
  if (w.sample_rate() == target_rate || w.empty()) {
    return Waveform(std::vector<float>(w.data()), target_rate);
  }
  const auto src = w.samples();
  const double ratio = static_cast<double>(w.sample_rate()) / target_rate;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(src.size()) * target_rate / w.sample_rate()));
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= src.size()) {
      out[i] = src.back();
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[i] = static_cast<float>(src[i0] * (1.0 - frac) + src[i0 + 1] * frac);
  }
  return Waveform(std::move(out), target_rate);
}

Waveform to_canonical(const Waveform& w) {
  if (w.sample_rate() == kCanonicalRate) return w;
  return resample(w, kCanonicalRate);
}

double energy(std::span<const float> samples) {
  double sum = 0.0;
  for (float s : samples) sum += static_cast<double>(s) * s;
  return sum;
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  return std::sqrt(energy(samples) / static_cast<double>(samples.size()));
}

double dbfs(double rms_value) { return 20.0 * std::log10(rms_value + 1e-12); }

}  // namespace deepsound::audio
