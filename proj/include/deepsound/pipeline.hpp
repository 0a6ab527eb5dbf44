#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepsound/audio.hpp"
#include "deepsound/cot.hpp"
#include "deepsound/detect.hpp"

namespace deepsound::pipeline {

enum class Strategy { direct, direct_neg, s3, s4_rm, s4_rep, s4_neg };

inline constexpr std::array<Strategy, 6> kAllStrategies = {
    Strategy::direct, Strategy::direct_neg, Strategy::s3,
    Strategy::s4_rm,  Strategy::s4_rep,     Strategy::s4_neg};

/// Snake-case flag name, e.g. "s4_rep".
std::string_view to_string(Strategy s) noexcept;
/// Display label, e.g. "Ours-s4-rep".
std::string_view display_label(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view text) noexcept;
bool is_s4(Strategy s) noexcept;

inline constexpr std::string_view kDefaultNegativePrompt = "human voice";
inline constexpr std::string_view kDefaultInstruction = "Generate audio from video.";

struct PipelineConfig {
  Strategy strategy = Strategy::s3;
  double silence_threshold_dbfs = -60.0;
  double bar_len = 1.0;
  detect::Mode detector_mode = detect::Mode::cot;
  std::string backend = "stub";
  std::string endpoint;
  double timeout_seconds = 120.0;
  std::string negative_prompt = std::string(kDefaultNegativePrompt);
  std::uint64_t seed = 0;

  void validate() const;
};

// Backends ------------------------------------------------------------------

struct V2ARequest {
  detect::VideoDescriptor video;
  std::string prompt;
  std::optional<std::string> negative_prompt;
  std::uint64_t seed = 0;
};

/// Step-1 audio generator. Implementations must be callable concurrently.
class V2ABackend {
 public:
  virtual ~V2ABackend() = default;
  virtual std::string id() const = 0;
  virtual audio::Waveform generate(const V2ARequest& request) const = 0;
};

enum class BackendErrorKind { connection, timeout, status, payload, unknown_backend };

std::string_view to_string(BackendErrorKind kind) noexcept;

class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message, int http_status = 0)
      : Error(ErrorKind::backend, message), kind_(kind), http_status_(http_status) {}

  BackendErrorKind backend_kind() const noexcept { return kind_; }
  int http_status() const noexcept { return http_status_; }

 private:
  BackendErrorKind kind_;
  int http_status_;
};

/// Deterministic procedural audio: ambience floor, a decaying noise burst at
/// every visual onset, and a harmonic voice layer inside person segments (or
/// across the clip when the prompt asks for voice) unless the negative prompt
/// mentions voice.
audio::Waveform stub_v2a(const detect::VideoDescriptor& video, std::string_view prompt,
                         const std::optional<std::string>& negative_prompt, std::uint64_t seed);

inline constexpr double kStubAmbienceDbfs = -66.0;
inline constexpr double kStubVoiceDbfs = -45.0;
inline constexpr double kStubVoiceF0 = 250.0;
inline constexpr double kStubBurstSeconds = 0.12;
inline constexpr double kStubBurstPeak = 0.5;

class StubBackend final : public V2ABackend {
 public:
  std::string id() const override { return "stub"; }
  audio::Waveform generate(const V2ARequest& request) const override;
};

inline constexpr std::string_view kEndpointEnv = "DEEPSOUND_V2A_ENDPOINT";

/// POSTs {video_descriptor, prompt, negative_prompt, seed} and decodes
/// {sample_rate, samples_b64} (little-endian float32) to canonical audio.
audio::Waveform http_v2a_client(const std::string& endpoint, const V2ARequest& request,
                                double timeout_seconds = 120.0);

std::string encode_v2a_request(const V2ARequest& request);
/// Throws BackendError(payload) on malformed responses.
audio::Waveform decode_v2a_response(std::string_view body);
std::string encode_v2a_response(const audio::Waveform& w);

class HttpBackend final : public V2ABackend {
 public:
  explicit HttpBackend(std::string endpoint, double timeout_seconds = 120.0);
  std::string id() const override { return "http"; }
  audio::Waveform generate(const V2ARequest& request) const override;
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
  double timeout_seconds_;
};

struct BackendOptions {
  std::string endpoint;
  double timeout_seconds = 120.0;
};

class BackendRegistry {
 public:
  using Factory = std::function<std::unique_ptr<V2ABackend>(const BackendOptions&)>;

  /// Registry preloaded with "stub" and "http".
  static BackendRegistry& global();

  void add(const std::string& id, Factory factory);
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;
  std::unique_ptr<V2ABackend> create(const std::string& id, const BackendOptions& options) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Factory> factories_;
};

/// Endpoint after applying the DEEPSOUND_V2A_ENDPOINT override.
std::string resolve_endpoint(const std::string& configured);

// Steps ----------------------------------------------------------------------

cot::CoTStructure generate_structure(std::string_view instruction,
                                     const detect::VideoDescriptor& video, Strategy strategy);

/// 20*log10(bar RMS + eps) < threshold.
bool is_silent(const audio::Waveform& w, detect::TimeSpan bar, double threshold_dbfs = -60.0);

/// Bar i covers [i*bar_len, (i+1)*bar_len); a trailing partial bar counts.
std::size_t bar_count(const audio::Waveform& w, double bar_len);
std::vector<std::size_t> find_silent_bars(const audio::Waveform& w, double bar_len,
                                          double threshold_dbfs);

audio::Waveform apply_fallback(const audio::Waveform& edited, const audio::Waveform& original,
                               const audio::Waveform* negative,
                               const std::vector<std::size_t>& silent_bars, Strategy strategy,
                               double bar_len = 1.0);

// Runs -------------------------------------------------------------------------

struct StepRecord {
  std::string name;
  double wall_seconds = 0.0;
};

struct RunManifest {
  std::string video_id;
  std::string instruction;
  cot::CoTStructure cot_structure;
  Strategy strategy = Strategy::s3;
  detect::Mode detector_mode = detect::Mode::cot;
  std::string backend;
  std::uint64_t seed = 0;
  std::optional<detect::VoiceOverVerdict> verdict;
  bool removal_applied = false;
  double attenuation_db = 0.0;
  std::vector<std::size_t> silent_bars;
  std::string coarse_audio;
  std::string edited_audio;
  std::string negative_audio;
  std::string final_audio;
  double final_duration = 0.0;
  std::vector<StepRecord> steps;
  std::string status = "ok";
  std::string failed_step;
  std::string error;
};

struct RunResult {
  RunManifest manifest;
  audio::Waveform coarse;
  audio::Waveform edited;
  std::optional<audio::Waveform> negative;
  audio::Waveform final_audio;
};

/// Failure inside a step; carries the manifest populated up to that point.
class PipelineError : public Error {
 public:
  PipelineError(ErrorKind kind, std::string step, const std::string& message, RunManifest partial)
      : Error(kind, message), step_(std::move(step)), partial_(std::move(partial)) {}

  const std::string& step() const noexcept { return step_; }
  const RunManifest& partial() const noexcept { return partial_; }

 private:
  std::string step_;
  RunManifest partial_;
};

RunResult run_pipeline(const detect::VideoDescriptor& video, std::string_view instruction,
                       const PipelineConfig& config, const V2ABackend& backend);

/// Resolves the backend from the global registry.
RunResult run_pipeline(const detect::VideoDescriptor& video, std::string_view instruction,
                       const PipelineConfig& config);

std::string manifest_to_json(const RunManifest& manifest, bool include_wall_times = true);

/// <out_root>/<video_id>/<strategy>/
std::filesystem::path run_directory(const std::filesystem::path& out_root,
                                    const std::string& video_id, Strategy strategy);

/// Runs and writes manifest.json, WAVs and CoT files; on failure the partial
/// manifest is written before the PipelineError propagates.
RunResult run_and_persist(const detect::VideoDescriptor& video, std::string_view instruction,
                          const PipelineConfig& config, const std::filesystem::path& out_root);

}  // namespace deepsound::pipeline
