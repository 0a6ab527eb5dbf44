#include "deepsound/deepsound.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "deepsound/dataset.hpp"
#include "deepsound/eval.hpp"
#include "deepsound/pipeline.hpp"
#include "util/file_io.hpp"

using namespace deepsound;

struct ds_string {
  std::string text;
};

struct ds_waveform {
  audio::Waveform w;
};

struct ds_video {
  detect::VideoDescriptor v;
};

struct ds_config {
  pipeline::PipelineConfig c;
};

struct ds_run {
  pipeline::RunResult result;
  std::string manifest_json;
  std::string directory;
  ds_waveform final_audio;
};

namespace {

thread_local std::string t_last_error;
thread_local std::string t_last_tag;

ds_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return DS_ERR_ARGUMENT;
    case ErrorKind::format: return DS_ERR_FORMAT;
    case ErrorKind::unsupported: return DS_ERR_UNSUPPORTED;
    case ErrorKind::empty_input: return DS_ERR_EMPTY_INPUT;
    case ErrorKind::io: return DS_ERR_IO;
    case ErrorKind::parse: return DS_ERR_PARSE;
    case ErrorKind::shape: return DS_ERR_SHAPE;
    case ErrorKind::alignment: return DS_ERR_ALIGNMENT;
    case ErrorKind::backend: return DS_ERR_BACKEND;
    case ErrorKind::insufficient_samples: return DS_ERR_INSUFFICIENT_SAMPLES;
    case ErrorKind::normalization: return DS_ERR_NORMALIZATION;
    case ErrorKind::pairing: return DS_ERR_PAIRING;
  }
  return DS_ERR_INTERNAL;
}

ds_status fail(ds_status status, std::string message, std::string tag = {}) {
  t_last_error = std::move(message);
  t_last_tag = std::move(tag);
  return status;
}

// Every entry point funnels through here so no exception crosses the C boundary.
template <typename F>
ds_status guarded(F&& body) noexcept {
  try {
    body();
    return DS_OK;
  } catch (const eval::MissingAudioError& e) {
    return fail(DS_ERR_MISSING_AUDIO, e.what());
  } catch (const cot::ParseError& e) {
    return fail(DS_ERR_PARSE, e.what(), e.tag());
  } catch (const Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(DS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DS_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::argument, std::string(what) + " must not be NULL");
}

ds_string* make_string(std::string text) { return new ds_string{std::move(text)}; }

}  // namespace

extern "C" {

const char* ds_status_name(ds_status status) {
  switch (status) {
    case DS_OK: return "ok";
    case DS_ERR_ARGUMENT: return "argument";
    case DS_ERR_FORMAT: return "format";
    case DS_ERR_UNSUPPORTED: return "unsupported";
    case DS_ERR_EMPTY_INPUT: return "empty_input";
    case DS_ERR_IO: return "io";
    case DS_ERR_PARSE: return "parse";
    case DS_ERR_SHAPE: return "shape";
    case DS_ERR_ALIGNMENT: return "alignment";
    case DS_ERR_BACKEND: return "backend";
    case DS_ERR_INSUFFICIENT_SAMPLES: return "insufficient_samples";
    case DS_ERR_NORMALIZATION: return "normalization";
    case DS_ERR_PAIRING: return "pairing";
    case DS_ERR_MISSING_AUDIO: return "missing_audio";
    case DS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ds_last_error(void) { return t_last_error.c_str(); }
const char* ds_last_error_tag(void) { return t_last_tag.c_str(); }
const char* ds_version(void) { return "0.1.0"; }

const char* ds_string_data(const ds_string* s) { return s ? s->text.c_str() : ""; }
size_t ds_string_size(const ds_string* s) { return s ? s->text.size() : 0; }
void ds_string_free(ds_string* s) { delete s; }

ds_status ds_waveform_create(const float* samples, size_t count, int sample_rate, ds_waveform** out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) require(samples, "samples");
    *out = new ds_waveform{audio::Waveform(std::vector<float>(samples, samples + count), sample_rate)};
  });
}

ds_status ds_waveform_read(const char* path, ds_waveform** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ds_waveform{audio::read_wav(path)};
  });
}

ds_status ds_waveform_write(const ds_waveform* w, const char* path) {
  return guarded([&] {
    require(w, "waveform");
    require(path, "path");
    audio::write_wav(path, w->w);
  });
}

size_t ds_waveform_size(const ds_waveform* w) { return w ? w->w.size() : 0; }
int ds_waveform_sample_rate(const ds_waveform* w) { return w ? w->w.sample_rate() : 0; }
const float* ds_waveform_samples(const ds_waveform* w) { return w ? w->w.samples().data() : nullptr; }
void ds_waveform_free(ds_waveform* w) { delete w; }

ds_status ds_video_read(const char* path, ds_video** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ds_video{detect::read_descriptor(path)};
  });
}

ds_status ds_video_parse(const char* json_text, ds_video** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new ds_video{detect::parse_descriptor(json_text)};
  });
}

const char* ds_video_id(const ds_video* v) { return v ? v->v.id.c_str() : ""; }
double ds_video_duration(const ds_video* v) { return v ? v->v.duration : 0.0; }
void ds_video_free(ds_video* v) { delete v; }

size_t ds_strategy_count(void) { return pipeline::kAllStrategies.size(); }

const char* ds_strategy_name(size_t index) {
  if (index >= pipeline::kAllStrategies.size()) return nullptr;
  return pipeline::to_string(pipeline::kAllStrategies[index]).data();
}

const char* ds_strategy_label(size_t index) {
  if (index >= pipeline::kAllStrategies.size()) return nullptr;
  return pipeline::display_label(pipeline::kAllStrategies[index]).data();
}

int ds_strategy_valid(const char* name) {
  return name && pipeline::parse_strategy(name).has_value() ? 1 : 0;
}

int ds_mode_valid(const char* name) { return name && detect::parse_mode(name).has_value() ? 1 : 0; }

ds_status ds_config_create(ds_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ds_config{};
  });
}

ds_status ds_config_set_strategy(ds_config* c, const char* name) {
  return guarded([&] {
    require(c, "config");
    require(name, "name");
    const auto s = pipeline::parse_strategy(name);
    if (!s) throw Error(ErrorKind::argument, std::string("unknown strategy '") + name + "'");
    c->c.strategy = *s;
  });
}

ds_status ds_config_set_mode(ds_config* c, const char* mode) {
  return guarded([&] {
    require(c, "config");
    require(mode, "mode");
    const auto m = detect::parse_mode(mode);
    if (!m) throw Error(ErrorKind::argument, std::string("unknown detector mode '") + mode + "'");
    c->c.detector_mode = *m;
  });
}

ds_status ds_config_set_seed(ds_config* c, uint64_t seed) {
  return guarded([&] {
    require(c, "config");
    c->c.seed = seed;
  });
}

ds_status ds_config_set_backend(ds_config* c, const char* backend_id) {
  return guarded([&] {
    require(c, "config");
    require(backend_id, "backend_id");
    if (!pipeline::BackendRegistry::global().contains(backend_id)) {
      throw Error(ErrorKind::argument, std::string("unknown backend '") + backend_id + "'");
    }
    c->c.backend = backend_id;
  });
}

ds_status ds_config_set_endpoint(ds_config* c, const char* url) {
  return guarded([&] {
    require(c, "config");
    require(url, "url");
    c->c.endpoint = url;
  });
}

ds_status ds_config_set_timeout(ds_config* c, double seconds) {
  return guarded([&] {
    require(c, "config");
    if (!(seconds > 0.0)) throw Error(ErrorKind::argument, "timeout must be positive");
    c->c.timeout_seconds = seconds;
  });
}

ds_status ds_config_set_negative_prompt(ds_config* c, const char* prompt) {
  return guarded([&] {
    require(c, "config");
    require(prompt, "prompt");
    c->c.negative_prompt = prompt;
  });
}

ds_status ds_config_set_bar_len(ds_config* c, double seconds) {
  return guarded([&] {
    require(c, "config");
    if (!(seconds > 0.0)) throw Error(ErrorKind::argument, "bar_len must be positive");
    c->c.bar_len = seconds;
  });
}

ds_status ds_config_set_silence_threshold(ds_config* c, double dbfs) {
  return guarded([&] {
    require(c, "config");
    if (!(dbfs < 0.0)) throw Error(ErrorKind::argument, "silence threshold must be below 0 dBFS");
    c->c.silence_threshold_dbfs = dbfs;
  });
}

void ds_config_free(ds_config* c) { delete c; }

ds_status ds_run_pipeline(const ds_video* video, const char* instruction, const ds_config* config,
                          const char* out_root, ds_run** out) {
  return guarded([&] {
    require(video, "video");
    require(config, "config");
    require(out, "out");
    const std::string_view instr = instruction ? instruction : "";
    auto run = std::make_unique<ds_run>();
    if (out_root) {
      run->result = pipeline::run_and_persist(video->v, instr, config->c, out_root);
      run->directory =
          pipeline::run_directory(out_root, video->v.id, config->c.strategy).string();
    } else {
      run->result = pipeline::run_pipeline(video->v, instr, config->c);
    }
    run->manifest_json = pipeline::manifest_to_json(run->result.manifest);
    run->final_audio.w = run->result.final_audio;
    *out = run.release();
  });
}

const char* ds_run_label(const ds_run* r) {
  if (!r || !r->result.manifest.verdict) return nullptr;
  return to_string(r->result.manifest.verdict->label).data();
}

const char* ds_run_strategy(const ds_run* r) {
  return r ? pipeline::to_string(r->result.manifest.strategy).data() : "";
}

const char* ds_run_manifest_json(const ds_run* r) { return r ? r->manifest_json.c_str() : ""; }
const char* ds_run_directory(const ds_run* r) { return r ? r->directory.c_str() : ""; }
int ds_run_removal_applied(const ds_run* r) { return r && r->result.manifest.removal_applied ? 1 : 0; }
size_t ds_run_silent_bar_count(const ds_run* r) { return r ? r->result.manifest.silent_bars.size() : 0; }
double ds_run_final_duration(const ds_run* r) { return r ? r->result.manifest.final_duration : 0.0; }
const ds_waveform* ds_run_final_audio(const ds_run* r) { return r ? &r->final_audio : nullptr; }
void ds_run_free(ds_run* r) { delete r; }

ds_status ds_cot_detail_canonical(const char* text, ds_string** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = make_string(cot::canonical_cot_detail(text));
  });
}

ds_status ds_cot_structure_canonical(const char* text, ds_string** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    const auto plan = cot::parse_cot_structure(text);
    cot::validate_cot_structure(plan);
    *out = make_string(cot::render_cot_structure(plan));
  });
}

ds_status ds_cot_score(const char* candidate, const char* gold, double scores[10]) {
  return guarded([&] {
    require(candidate, "candidate");
    require(gold, "gold");
    require(scores, "scores");
    const auto s = cot::cot_total_score(std::string_view(candidate), cot::parse_cot_detail(gold));
    const double values[10] = {s.format_total, s.format_structure, s.format_sm, s.format_cp,
                               s.format_rn,    s.format_cc,        s.keyword_cp, s.keyword_rn,
                               s.keyword_cc,   s.total};
    std::memcpy(scores, values, sizeof values);
  });
}

ds_status ds_corpus_build(const char* out_dir, size_t n, const double mix[4], uint64_t seed,
                          size_t borderline, ds_string** manifest_json) {
  return guarded([&] {
    require(out_dir, "out_dir");
    require(mix, "mix");
    dataset::CorpusOptions options;
    options.borderline = borderline;
    const auto m = dataset::build_corpus(n, {mix[0], mix[1], mix[2], mix[3]}, seed, out_dir, options);
    if (manifest_json) *manifest_json = make_string(dataset::manifest_to_json(m));
  });
}

ds_status ds_parse_mix(const char* text, double mix[4]) {
  return guarded([&] {
    require(text, "text");
    require(mix, "mix");
    const auto parsed = dataset::parse_mix(text);
    std::copy(parsed.begin(), parsed.end(), mix);
  });
}

ds_status ds_corpus_validate(const char* manifest_path, ds_string** violations, size_t* count) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    const auto found = dataset::validate_manifest(manifest_path);
    std::string text;
    for (const auto& v : found) {
      text += std::string(dataset::to_string(v.kind)) + "\t" + v.id + "\t" + v.message + "\n";
    }
    if (count) *count = found.size();
    if (violations) *violations = make_string(std::move(text));
  });
}

ds_status ds_corpus_label_stats(const char* manifest_path, size_t counts[4], double proportions[4]) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(counts, "counts");
    const auto stats = dataset::label_stats(dataset::read_manifest(manifest_path));
    for (std::size_t i = 0; i < 4; ++i) {
      counts[i] = stats.counts[i];
      if (proportions) proportions[i] = stats.proportions[i];
    }
  });
}

ds_status ds_eval_methods(const char* manifest_path, const char* const* method_dirs,
                          size_t method_count, const char* out_dir, ds_string** table) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    if (method_count > 0) require(method_dirs, "method_dirs");
    std::vector<std::filesystem::path> dirs;
    for (size_t i = 0; i < method_count; ++i) {
      require(method_dirs[i], "method directory");
      dirs.emplace_back(method_dirs[i]);
    }
    const auto report = eval::evaluate_methods(manifest_path, dirs);
    eval::emit_report(report, out_dir);
    if (table) *table = make_string(eval::render_report_table(report));
  });
}

ds_status ds_eval_qa_cot(const char* manifest_path, const char* label, const char* out_dir,
                         ds_string** row) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    const auto report = eval::evaluate_qa_cot(manifest_path);
    const std::string name = label ? label : "stub";
    const auto line = eval::format_qa_cot_row(name, report);
    if (out_dir) {
      const std::filesystem::path dir(out_dir);
      util::write_text_file(dir / "qa_cot.txt",
                            "Method, QA Ratio, CoT Ratio, QA Num, CoT Num, Total\n" + line + "\n");
      nlohmann::json j{{"method", name},         {"qa_ratio", report.qa_ratio},
                       {"cot_ratio", report.cot_ratio}, {"qa_num", report.qa_num},
                       {"cot_num", report.cot_num},     {"total", report.total}};
      util::write_text_file(dir / "qa_cot.json", j.dump(2) + "\n");
    }
    if (row) *row = make_string(line);
  });
}

ds_status ds_report_emit(const char* report_json_path, const char* out_dir, ds_string** table) {
  return guarded([&] {
    require(report_json_path, "report_json_path");
    require(out_dir, "out_dir");
    const auto report = eval::parse_report_json(util::read_text_file(report_json_path));
    eval::emit_report(report, out_dir);
    if (table) *table = make_string(eval::render_report_table(report));
  });
}

}  // extern "C"
