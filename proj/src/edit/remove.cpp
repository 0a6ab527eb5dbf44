#include <cmath>

#include "deepsound/edit.hpp"

namespace deepsound::edit {
namespace {

constexpr std::size_t kFrame = audio::kDefaultFrameLen;
constexpr std::size_t kHop = audio::kDefaultHop;

struct Padded {
  std::vector<float> samples;
  std::size_t offset = 0;
};

// One frame of zeros on both sides plus enough tail for whole hops, so every
// original sample sees four full windows.
Padded pad(std::span<const float> samples) {
  Padded p;
  p.offset = kFrame;
  std::size_t len = samples.size() + 2 * kFrame;
  const std::size_t rem = (len - kFrame) % kHop;
  if (rem) len += kHop - rem;
  p.samples.assign(len, 0.0f);
  std::copy(samples.begin(), samples.end(), p.samples.begin() + static_cast<std::ptrdiff_t>(kFrame));
  return p;
}

audio::Waveform crop(const std::vector<double>& padded, std::size_t offset, std::size_t n, int sr) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(padded[offset + i]);
  return audio::Waveform(std::move(out), sr);
}

double voice_band_energy(std::span<const float> samples, int sr) {
  std::vector<float> buf(samples.begin(), samples.end());
  if (buf.size() < kFrame) buf.resize(kFrame, 0.0f);
  const auto spec = audio::stft(audio::Waveform(std::move(buf), sr));
  return audio::band_energy(spec, detect::kVoiceBand);
}

void check_same_shape(const audio::Waveform& a, const audio::Waveform& b) {
  if (a.size() != b.size() || a.sample_rate() != b.sample_rate()) {
    throw Error(ErrorKind::shape, "waveforms differ in length or sample rate");
  }
}

}  // namespace

audio::Waveform overlap_add_identity(const audio::Waveform& w) {
  const auto p = pad(w.samples());
  const auto spec = audio::stft_complex(p.samples, kFrame, kHop);
  return crop(audio::istft(spec, p.samples.size()), p.offset, w.size(), w.sample_rate());
}

RemovalResult remove_voice(const audio::Waveform& w, const std::vector<detect::TimeSpan>& voiced) {
  const auto spans = detect::normalize_spans(voiced, w.duration());
  RemovalResult result;
  if (spans.empty() || w.empty()) {
    result.audio = w;
    return result;
  }

  const auto p = pad(w.samples());
  auto spec = audio::stft_complex(p.samples, kFrame, kHop);
  const double sr = w.sample_rate();
  const double gain = std::pow(10.0, -kAttenuationDb / 20.0);

  std::size_t lo_bin = spec.bins, hi_bin = 0;
  for (std::size_t k = 0; k < spec.bins; ++k) {
    const double hz = static_cast<double>(k) * sr / static_cast<double>(kFrame);
    if (hz >= detect::kVoiceBand.low_hz && hz <= detect::kVoiceBand.high_hz) {
      lo_bin = std::min(lo_bin, k);
      hi_bin = std::max(hi_bin, k);
    }
  }

  std::size_t masked_bins = 0;
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double start = (static_cast<double>(f * kHop) - static_cast<double>(p.offset)) / sr;
    const double end = start + static_cast<double>(kFrame) / sr;
    bool overlaps = false;
    for (const auto& s : spans) {
      if (start < s.t1 && end > s.t0) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) continue;
    auto* row = spec.values.data() + f * spec.bins;
    for (std::size_t k = lo_bin; k <= hi_bin; ++k) row[k] *= gain;
    masked_bins += hi_bin - lo_bin + 1;
  }

  result.audio = crop(audio::istft(spec, p.samples.size()), p.offset, w.size(), w.sample_rate());
  double before = 0.0, after = 0.0;
  for (const auto& s : spans) {
    const auto i0 = w.index_at(s.t0);
    const auto i1 = w.index_at(s.t1);
    before += voice_band_energy(w.samples().subspan(i0, i1 - i0), w.sample_rate());
    after += voice_band_energy(result.audio.samples().subspan(i0, i1 - i0), w.sample_rate());
  }
  result.attenuation_db =
      (before > 0.0 && after > 0.0) ? std::max(0.0, 10.0 * std::log10(before / after)) : 0.0;
  result.mask_coverage =
      static_cast<double>(masked_bins) / static_cast<double>(spec.frames * spec.bins);
  return result;
}

double audio_remove_loss(const audio::Waveform& a_hat, const audio::Waveform& a_gt,
                         const audio::BandSet& bands) {
  check_same_shape(a_hat, a_gt);
  if (a_hat.empty()) return 0.0;
  const auto x = a_hat.samples();
  const auto y = a_gt.samples();
  double time_term = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    time_term += std::abs(static_cast<double>(x[i]) - static_cast<double>(y[i]));
  }
  time_term /= static_cast<double>(x.size());

  if (a_hat.size() < kFrame) return time_term;
  const auto sx = audio::stft(a_hat);
  const auto sy = audio::stft(a_gt);
  double freq_term = 0.0;
  for (const auto& band : bands.bands()) {
    const auto ex = audio::band_energy_per_frame(sx, band);
    const auto ey = audio::band_energy_per_frame(sy, band);
    double sum = 0.0;
    for (std::size_t f = 0; f < ex.size(); ++f) sum += std::abs(ex[f] - ey[f]);
    freq_term += sum / static_cast<double>(ex.size());
  }
  return time_term + freq_term;
}

double audio_remove_loss(const audio::Waveform& a_hat, const audio::Waveform& a_gt) {
  return audio_remove_loss(a_hat, a_gt, audio::BandSet::log_spaced(4, a_gt.sample_rate()));
}

double audio_gen_mse(const audio::Waveform& a_hat, const audio::Waveform& a_gt) {
  check_same_shape(a_hat, a_gt);
  if (a_hat.empty()) return 0.0;
  const auto x = a_hat.samples();
  const auto y = a_gt.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

}  // namespace deepsound::edit
