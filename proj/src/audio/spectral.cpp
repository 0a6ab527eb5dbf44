#include <cmath>

#include "deepsound/audio.hpp"

namespace deepsound::audio {

BandSet::BandSet(std::vector<Band> bands, int sample_rate) : bands_(std::move(bands)) {
  const double nyquist = sample_rate / 2.0;
  double prev_high = 0.0;
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const auto& b = bands_[i];
    if (!(b.low_hz >= 0.0 && b.low_hz < b.high_hz && b.high_hz <= nyquist)) {
      throw Error(ErrorKind::argument, "band outside [0, Nyquist] or inverted");
    }
    if (i > 0 && b.low_hz < prev_high) {
      throw Error(ErrorKind::argument, "bands must be ascending and non-overlapping");
    }
    prev_high = b.high_hz;
  }
}

BandSet BandSet::log_spaced(std::size_t count, int sample_rate, double ratio) {
  if (count == 0 || ratio <= 1.0) throw Error(ErrorKind::argument, "invalid band layout");
  const double nyquist = sample_rate / 2.0;
  std::vector<double> edges(count + 1);
  edges[0] = 0.0;
  for (std::size_t i = 1; i <= count; ++i) {
    edges[i] = nyquist / std::pow(ratio, static_cast<double>(count - i));
  }
  std::vector<Band> bands;
  for (std::size_t i = 0; i < count; ++i) bands.push_back({edges[i], edges[i + 1]});
  return BandSet(std::move(bands), sample_rate);
}

BandSet BandSet::full(int sample_rate) {
  return BandSet({{0.0, sample_rate / 2.0}}, sample_rate);
}

ComplexStft stft_complex(std::span<const float> samples, std::size_t frame_len,
                         std::size_t hop) {
  if (!is_power_of_two(frame_len)) {
    throw Error(ErrorKind::argument, "frame_len must be a power of two");
  }
  if (hop == 0 || hop > frame_len) throw Error(ErrorKind::argument, "hop must be in (0, frame_len]");
  if (samples.size() < frame_len) {
    throw Error(ErrorKind::empty_input, "waveform shorter than one analysis frame");
  }
  ComplexStft out;
  out.frame_len = frame_len;
  out.hop = hop;
  out.bins = frame_len / 2 + 1;
  out.frames = (samples.size() - frame_len) / hop + 1;
  out.values.resize(out.frames * out.bins);

  const auto window = hann(frame_len);
  std::vector<std::complex<double>> buf(frame_len);
  for (std::size_t f = 0; f < out.frames; ++f) {
    const std::size_t offset = f * hop;
    for (std::size_t n = 0; n < frame_len; ++n) buf[n] = samples[offset + n] * window[n];
    fft(buf);
    std::copy_n(buf.begin(), out.bins, out.values.begin() + f * out.bins);
  }
  return out;
}

std::vector<double> istft(const ComplexStft& spec, std::size_t length) {
  const std::size_t n = spec.frame_len;
  const auto window = hann(n);
  std::vector<double> out(length, 0.0);
  std::vector<double> norm(length, 0.0);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const auto* row = spec.values.data() + f * spec.bins;
    for (std::size_t k = 0; k < spec.bins; ++k) buf[k] = row[k];
    for (std::size_t k = spec.bins; k < n; ++k) buf[k] = std::conj(row[n - k]);
    fft(buf, true);
    const std::size_t offset = f * spec.hop;
    for (std::size_t i = 0; i < n && offset + i < length; ++i) {
      out[offset + i] += buf[i].real() * window[i];
      norm[offset + i] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = norm[i] > 1e-8 ? out[i] / norm[i] : 0.0;
  }
  return out;
}

Spectrogram stft(const Waveform& w, std::size_t frame_len, std::size_t hop) {
  const auto c = stft_complex(w.samples(), frame_len, hop);
  Spectrogram s;
  s.frames = c.frames;
  s.bins = c.bins;
  s.frame_len = frame_len;
  s.hop = hop;
  s.sample_rate = w.sample_rate();
  s.magnitudes.resize(c.values.size());
  for (std::size_t i = 0; i < c.values.size(); ++i) s.magnitudes[i] = std::abs(c.values[i]);
  return s;
}

namespace {

void check_band(const Spectrogram& spec, Band band) {
  if (band.low_hz >= band.high_hz) throw Error(ErrorKind::argument, "inverted band");
  if (band.low_hz < 0.0 || band.high_hz > spec.nyquist() + 1e-9) {
    throw Error(ErrorKind::argument, "band exceeds Nyquist");
  }
}

bool in_band(const Spectrogram& spec, std::size_t bin, Band band) {
  const double hz = spec.bin_hz(bin);
  if (hz >= band.low_hz && hz < band.high_hz) return true;
  return bin == spec.bins - 1 && band.high_hz >= spec.nyquist();
}

}  // namespace

std::vector<double> band_energy_per_frame(const Spectrogram& spec, Band band) {
  check_band(spec, band);
  std::vector<double> out(spec.frames, 0.0);
  for (std::size_t k = 0; k < spec.bins; ++k) {
    if (!in_band(spec, k, band)) continue;
    for (std::size_t f = 0; f < spec.frames; ++f) {
      const double m = spec.at(f, k);
      out[f] += m * m;
    }
  }
  return out;
}

double band_energy(const Spectrogram& spec, Band band) {
  double sum = 0.0;
  for (double e : band_energy_per_frame(spec, band)) sum += e;
  return sum;
}

double total_energy(const Spectrogram& spec) {
  double sum = 0.0;
  for (double m : spec.magnitudes) sum += m * m;
  return sum;
}

std::vector<RmsSegment> rms_segments(const Waveform& w, double seg_len) {
  if (!(seg_len > 0.0)) throw Error(ErrorKind::argument, "seg_len must be positive");
  std::vector<RmsSegment> out;
  if (w.empty()) return out;
  const auto seg = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(seg_len * w.sample_rate())));
  const auto samples = w.samples();
  const double sr = w.sample_rate();
  for (std::size_t start = 0; start < samples.size(); start += seg) {
    const std::size_t len = std::min(seg, samples.size() - start);
    if (len < seg && 4 * len < seg) break;
    out.push_back({start / sr, (start + len) / sr, rms(samples.subspan(start, len))});
  }
  return out;
}

}  // namespace deepsound::audio
