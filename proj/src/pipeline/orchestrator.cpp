#include <chrono>

#include <json.hpp>

#include "deepsound/edit.hpp"
#include "deepsound/pipeline.hpp"
#include "util/file_io.hpp"

namespace deepsound::pipeline {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Backends may return audio a few samples off the descriptor duration; the
// negative-prompt take is spliced samplewise so it must match coarse exactly.
audio::Waveform fit_length(const audio::Waveform& w, std::size_t n) {
  std::vector<float> s(w.samples().begin(), w.samples().end());
  s.resize(n, 0.0f);
  return audio::Waveform(std::move(s), w.sample_rate());
}

class StepRunner {
 public:
  explicit StepRunner(RunManifest& manifest) : manifest_(manifest) {}

  template <typename F>
  auto run(const std::string& name, F&& body) {
    const auto started = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(name, started);
      } else {
        auto out = body();
        record(name, started);
        return out;
      }
    } catch (const Error& e) {
      fail(name, started, e.kind(), e.what());
    } catch (const std::exception& e) {
      fail(name, started, ErrorKind::argument, e.what());
    }
  }

 private:
  void record(const std::string& name, Clock::time_point started) {
    manifest_.steps.push_back(
        {name, std::chrono::duration<double>(Clock::now() - started).count()});
  }

  [[noreturn]] void fail(const std::string& name, Clock::time_point started, ErrorKind kind,
                         const std::string& what) {
    record(name, started);
    manifest_.status = "failed";
    manifest_.failed_step = name;
    manifest_.error = what;
    throw PipelineError(kind, name, "step '" + name + "' failed: " + what, manifest_);
  }

  RunManifest& manifest_;
};

json spans_json(const std::vector<detect::TimeSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back({s.t0, s.t1});
  return out;
}

}  // namespace

RunResult run_pipeline(const detect::VideoDescriptor& video, std::string_view instruction,
                       const PipelineConfig& config, const V2ABackend& backend) {
  config.validate();
  detect::validate(video);

  RunResult result;
  RunManifest& m = result.manifest;
  m.video_id = video.id;
  m.instruction = instruction.empty() ? std::string(kDefaultInstruction) : std::string(instruction);
  m.strategy = config.strategy;
  m.detector_mode = config.detector_mode;
  m.backend = backend.id();
  m.seed = config.seed;
  m.cot_structure = generate_structure(m.instruction, video, config.strategy);
  cot::validate_cot_structure(m.cot_structure);

  StepRunner steps(m);
  V2ARequest request{video, m.instruction, std::nullopt, config.seed};
  if (config.strategy == Strategy::direct_neg) request.negative_prompt = config.negative_prompt;

  result.coarse = steps.run("generate", [&] { return backend.generate(request); });
  m.coarse_audio = "coarse.wav";

  if (!m.cot_structure.contains(cot::PlanStep::detect)) {
    result.edited = result.coarse;
    result.final_audio = result.coarse;
    m.final_audio = "final.wav";
    m.final_duration = result.final_audio.duration();
    return result;
  }

  const auto verdict = steps.run("detect", [&] {
    return detect::judge(video, result.coarse, config.detector_mode);
  });
  m.verdict = verdict;

  result.edited = steps.run("remove", [&] {
    if (verdict.label != VerdictLabel::yes) return result.coarse;
    auto removed = edit::remove_voice(result.coarse, verdict.voiced_segments);
    m.removal_applied = true;
    m.attenuation_db = removed.attenuation_db;
    return std::move(removed.audio);
  });
  m.edited_audio = "edited.wav";

  result.final_audio = steps.run("silence_check", [&] {
    if (!is_s4(config.strategy)) return result.edited;
    if (config.strategy == Strategy::s4_neg) {
      V2ARequest neg = request;
      neg.negative_prompt = config.negative_prompt;
      result.negative = fit_length(backend.generate(neg), result.coarse.size());
      m.negative_audio = "negative.wav";
    }
    m.silent_bars = find_silent_bars(result.edited, config.bar_len, config.silence_threshold_dbfs);
    return apply_fallback(result.edited, result.coarse,
                          result.negative ? &*result.negative : nullptr, m.silent_bars,
                          config.strategy, config.bar_len);
  });
  m.final_audio = "final.wav";
  m.final_duration = result.final_audio.duration();
  return result;
}

RunResult run_pipeline(const detect::VideoDescriptor& video, std::string_view instruction,
                       const PipelineConfig& config) {
  const auto backend = BackendRegistry::global().create(
      config.backend, BackendOptions{config.endpoint, config.timeout_seconds});
  return run_pipeline(video, instruction, config, *backend);
}

std::string manifest_to_json(const RunManifest& m, bool include_wall_times) {
  json j;
  j["video_id"] = m.video_id;
  j["instruction"] = m.instruction;
  j["cot_structure"] = cot::render_cot_structure(m.cot_structure);
  j["strategy"] = std::string(to_string(m.strategy));
  j["strategy_label"] = std::string(display_label(m.strategy));
  j["detector_mode"] = std::string(detect::to_string(m.detector_mode));
  j["backend"] = m.backend;
  j["seed"] = m.seed;
  if (m.verdict) {
    const auto& v = *m.verdict;
    json jv;
    jv["label"] = std::string(to_string(v.label));
    jv["person_present"] = v.person_present;
    jv["voice_present"] = v.voice_present;
    jv["voiced_segments"] = spans_json(v.voiced_segments);
    jv["mode"] = std::string(detect::to_string(v.mode));
    jv["cot_detail"] = v.cot ? json(cot::render_cot_detail(*v.cot)) : json(nullptr);
    j["verdict"] = jv;
  } else {
    j["verdict"] = nullptr;
  }
  j["removal_applied"] = m.removal_applied;
  j["attenuation_db"] = m.attenuation_db;
  j["silent_bars"] = m.silent_bars;
  auto ref = [](const std::string& s) { return s.empty() ? json(nullptr) : json(s); };
  j["coarse_audio"] = ref(m.coarse_audio);
  j["edited_audio"] = ref(m.edited_audio);
  j["negative_audio"] = ref(m.negative_audio);
  j["final_audio"] = ref(m.final_audio);
  j["final_duration"] = m.final_duration;
  j["steps"] = json::array();
  for (const auto& s : m.steps) {
    json js{{"name", s.name}};
    if (include_wall_times) js["wall_seconds"] = s.wall_seconds;
    j["steps"].push_back(js);
  }
  j["status"] = m.status;
  if (!m.failed_step.empty()) {
    j["failed_step"] = m.failed_step;
    j["error"] = m.error;
  }
  return j.dump(2) + "\n";
}

std::filesystem::path run_directory(const std::filesystem::path& out_root,
                                    const std::string& video_id, Strategy strategy) {
  return out_root / video_id / std::string(to_string(strategy));
}

RunResult run_and_persist(const detect::VideoDescriptor& video, std::string_view instruction,
                          const PipelineConfig& config, const std::filesystem::path& out_root) {
  const auto dir = run_directory(out_root, video.id, config.strategy);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create run directory " + dir.string() + ": " + ec.message());

  RunResult result;
  try {
    result = run_pipeline(video, instruction, config);
  } catch (const PipelineError& e) {
    util::write_text_file(dir / "manifest.json", manifest_to_json(e.partial()));
    throw;
  }

  const auto& m = result.manifest;
  audio::write_wav(dir / m.coarse_audio, result.coarse);
  if (!m.edited_audio.empty()) audio::write_wav(dir / m.edited_audio, result.edited);
  if (result.negative) audio::write_wav(dir / m.negative_audio, *result.negative);
  audio::write_wav(dir / m.final_audio, result.final_audio);
  util::write_text_file(dir / "cot_structure.txt", cot::render_cot_structure(m.cot_structure));
  if (m.verdict && m.verdict->cot) {
    util::write_text_file(dir / "cot_detail.txt", cot::render_cot_detail(*m.verdict->cot));
  }
  util::write_text_file(dir / "manifest.json", manifest_to_json(m));
  return result;
}

}  // namespace deepsound::pipeline
