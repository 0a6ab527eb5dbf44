#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "deepsound/error.hpp"

namespace deepsound::audio {

inline constexpr int kCanonicalRate = 16000;
inline constexpr std::size_t kDefaultFrameLen = 1024;
inline constexpr std::size_t kDefaultHop = 256;

/// Mono sampled audio. Samples are nominally in [-1, 1].
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<float> samples, int sample_rate);

  static Waveform zeros(std::size_t n, int sample_rate = kCanonicalRate);

  std::span<const float> samples() const noexcept { return samples_; }
  std::span<float> samples() noexcept { return samples_; }
  std::vector<float>& data() noexcept { return samples_; }
  const std::vector<float>& data() const noexcept { return samples_; }

  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  /// Sample index for a time in seconds, clamped to [0, size()].
  std::size_t index_at(double seconds) const noexcept;

  bool operator==(const Waveform&) const = default;

 private:
  std::vector<float> samples_;
  int sample_rate_ = kCanonicalRate;
};

/// Linear-interpolation resampling.
Waveform resample(const Waveform& w, int target_rate);

/// Resamples to the canonical 16 kHz rate when needed.
Waveform to_canonical(const Waveform& w);

Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(std::span<const unsigned char> bytes);

/// Always writes mono float32 at the canonical rate.
void write_wav(const std::filesystem::path& path, const Waveform& w);
std::vector<unsigned char> encode_wav(const Waveform& w);

/// Magnitude spectrogram, row-major [frame][bin].
struct Spectrogram {
  std::vector<double> magnitudes;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int sample_rate = kCanonicalRate;

  double at(std::size_t frame, std::size_t bin) const {
    return magnitudes[frame * bins + bin];
  }
  double bin_hz(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate / static_cast<double>(frame_len);
  }
  double nyquist() const { return sample_rate / 2.0; }
};

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// Ordered, non-overlapping frequency bands.
class BandSet {
 public:
  BandSet() = default;
  BandSet(std::vector<Band> bands, int sample_rate);

  /// `count` bands, log-spaced by `ratio`, partitioning [0, Nyquist].
  static BandSet log_spaced(std::size_t count, int sample_rate, double ratio = 4.0);
  static BandSet full(int sample_rate);

  const std::vector<Band>& bands() const noexcept { return bands_; }
  std::size_t size() const noexcept { return bands_.size(); }

 private:
  std::vector<Band> bands_;
};

/// Periodic Hann window of length n.
std::vector<double> hann(std::size_t n);

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// Complex Hann-windowed STFT frames without padding, row-major [frame][bin].
struct ComplexStft {
  std::vector<std::complex<double>> values;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
};

ComplexStft stft_complex(std::span<const float> samples, std::size_t frame_len,
                         std::size_t hop);

/// Weighted overlap-add inverse of `stft_complex`; output length `length`.
std::vector<double> istft(const ComplexStft& spec, std::size_t length);

Spectrogram stft(const Waveform& w, std::size_t frame_len = kDefaultFrameLen,
                 std::size_t hop = kDefaultHop);

/// Sum of squared magnitudes over bins whose centre lies in [low, high),
/// summed over frames. A band ending at Nyquist includes the Nyquist bin.
double band_energy(const Spectrogram& spec, Band band);

/// Per-frame band energies for one band.
std::vector<double> band_energy_per_frame(const Spectrogram& spec, Band band);

double total_energy(const Spectrogram& spec);

struct RmsSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double rms = 0.0;
};

std::vector<RmsSegment> rms_segments(const Waveform& w, double seg_len);

double rms(std::span<const float> samples);
double energy(std::span<const float> samples);

/// 20*log10(rms + eps).
double dbfs(double rms_value);

}  // namespace deepsound::audio
