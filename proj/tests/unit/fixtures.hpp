#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "deepsound/audio.hpp"

namespace fixtures {

inline constexpr double kTwoPi = 6.283185307179586;

inline deepsound::audio::Waveform sine(double hz, double seconds, double amp = 1.0,
                                       int sr = deepsound::audio::kCanonicalRate) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<float>(amp * std::sin(kTwoPi * hz * static_cast<double>(i) / sr));
  }
  return {std::move(s), sr};
}

/// Equal-amplitude partials, total peak `amp`.
inline deepsound::audio::Waveform harmonic_stack(const std::vector<double>& partials, double seconds,
                                                 double amp = 0.5) {
  auto out = deepsound::audio::Waveform::zeros(
      static_cast<std::size_t>(std::llround(seconds * deepsound::audio::kCanonicalRate)));
  for (double hz : partials) {
    const auto s = sine(hz, seconds, amp / static_cast<double>(partials.size()));
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += s.data()[i];
  }
  return out;
}

/// Adds `src` into `dst` starting at sample `offset`, clipped to dst.
inline void mix_into(deepsound::audio::Waveform& dst, const deepsound::audio::Waveform& src,
                     std::size_t offset = 0) {
  for (std::size_t i = 0; i < src.size() && offset + i < dst.size(); ++i) {
    dst.data()[offset + i] += src.data()[i];
  }
}

inline deepsound::audio::Waveform noise(double seconds, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  const auto n = static_cast<std::size_t>(std::llround(seconds * deepsound::audio::kCanonicalRate));
  std::vector<float> s(n);
  for (auto& x : s) x = static_cast<float>(amp) * dist(rng);
  return {std::move(s), deepsound::audio::kCanonicalRate};
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("deepsound_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
