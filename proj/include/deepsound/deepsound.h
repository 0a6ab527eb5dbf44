#ifndef DEEPSOUND_DEEPSOUND_H
#define DEEPSOUND_DEEPSOUND_H

#include <stddef.h>
#include <stdint.h>

#if defined(DS_BUILDING_LIBRARY)
#define DS_API __attribute__((visibility("default")))
#else
#define DS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure ds_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum ds_status {
  DS_OK = 0,
  DS_ERR_ARGUMENT = 1,
  DS_ERR_FORMAT = 2,
  DS_ERR_UNSUPPORTED = 3,
  DS_ERR_EMPTY_INPUT = 4,
  DS_ERR_IO = 5,
  DS_ERR_PARSE = 6,
  DS_ERR_SHAPE = 7,
  DS_ERR_ALIGNMENT = 8,
  DS_ERR_BACKEND = 9,
  DS_ERR_INSUFFICIENT_SAMPLES = 10,
  DS_ERR_NORMALIZATION = 11,
  DS_ERR_PAIRING = 12,
  DS_ERR_MISSING_AUDIO = 13,
  DS_ERR_INTERNAL = 99
} ds_status;

DS_API const char* ds_status_name(ds_status status);
DS_API const char* ds_last_error(void);
/* Tag or plan step named by the last parse error, or "" if none. */
DS_API const char* ds_last_error_tag(void);
DS_API const char* ds_version(void);

/* Owned strings ----------------------------------------------------------- */

typedef struct ds_string ds_string;

DS_API const char* ds_string_data(const ds_string* s);
DS_API size_t ds_string_size(const ds_string* s);
DS_API void ds_string_free(ds_string* s);

/* Waveforms ---------------------------------------------------------------- */

typedef struct ds_waveform ds_waveform;

DS_API ds_status ds_waveform_create(const float* samples, size_t count, int sample_rate,
                                    ds_waveform** out);
DS_API ds_status ds_waveform_read(const char* path, ds_waveform** out);
DS_API ds_status ds_waveform_write(const ds_waveform* w, const char* path);
DS_API size_t ds_waveform_size(const ds_waveform* w);
DS_API int ds_waveform_sample_rate(const ds_waveform* w);
DS_API const float* ds_waveform_samples(const ds_waveform* w);
DS_API void ds_waveform_free(ds_waveform* w);

/* Video descriptors -------------------------------------------------------- */

typedef struct ds_video ds_video;

DS_API ds_status ds_video_read(const char* path, ds_video** out);
DS_API ds_status ds_video_parse(const char* json_text, ds_video** out);
DS_API const char* ds_video_id(const ds_video* v);
DS_API double ds_video_duration(const ds_video* v);
DS_API void ds_video_free(ds_video* v);

/* Vocabularies ------------------------------------------------------------- */

DS_API size_t ds_strategy_count(void);
/* Snake-case flag name ("s4_rep") and display label ("Ours-s4-rep"). */
DS_API const char* ds_strategy_name(size_t index);
DS_API const char* ds_strategy_label(size_t index);
DS_API int ds_strategy_valid(const char* name);
DS_API int ds_mode_valid(const char* name);

/* Pipeline ------------------------------------------------------------------ */

typedef struct ds_config ds_config;
typedef struct ds_run ds_run;

DS_API ds_status ds_config_create(ds_config** out);
DS_API ds_status ds_config_set_strategy(ds_config* c, const char* name);
/* "QA" or "CoT" (case-insensitive). */
DS_API ds_status ds_config_set_mode(ds_config* c, const char* mode);
DS_API ds_status ds_config_set_seed(ds_config* c, uint64_t seed);
DS_API ds_status ds_config_set_backend(ds_config* c, const char* backend_id);
DS_API ds_status ds_config_set_endpoint(ds_config* c, const char* url);
DS_API ds_status ds_config_set_timeout(ds_config* c, double seconds);
DS_API ds_status ds_config_set_negative_prompt(ds_config* c, const char* prompt);
DS_API ds_status ds_config_set_bar_len(ds_config* c, double seconds);
DS_API ds_status ds_config_set_silence_threshold(ds_config* c, double dbfs);
DS_API void ds_config_free(ds_config* c);

/* Runs the pipeline. With a non-NULL out_root the run directory
 * <out_root>/<video_id>/<strategy>/ receives the manifest, WAVs and CoT
 * files; a failing step still writes its partial manifest there. */
DS_API ds_status ds_run_pipeline(const ds_video* video, const char* instruction,
                                 const ds_config* config, const char* out_root, ds_run** out);
/* Verdict label ("Yes", "No1", ...) or NULL for plans without detection. */
DS_API const char* ds_run_label(const ds_run* r);
DS_API const char* ds_run_strategy(const ds_run* r);
DS_API const char* ds_run_manifest_json(const ds_run* r);
DS_API const char* ds_run_directory(const ds_run* r);
DS_API int ds_run_removal_applied(const ds_run* r);
DS_API size_t ds_run_silent_bar_count(const ds_run* r);
DS_API double ds_run_final_duration(const ds_run* r);
/* Borrowed; valid until ds_run_free. */
DS_API const ds_waveform* ds_run_final_audio(const ds_run* r);
DS_API void ds_run_free(ds_run* r);

/* CoT documents ------------------------------------------------------------- */

/* Canonical rendering of a reasoning document; DS_ERR_PARSE on grammar errors. */
DS_API ds_status ds_cot_detail_canonical(const char* text, ds_string** out);
DS_API ds_status ds_cot_structure_canonical(const char* text, ds_string** out);
/* Writes format_total, format_structure, format_sm, format_cp, format_rn,
 * format_cc, keyword_cp, keyword_rn, keyword_cc, total into scores[10]. */
DS_API ds_status ds_cot_score(const char* candidate, const char* gold, double scores[10]);

/* Corpora ----------------------------------------------------------------------- */

/* mix: proportions for Yes, No1, No2, No3. Returns the manifest JSON. */
DS_API ds_status ds_corpus_build(const char* out_dir, size_t n, const double mix[4], uint64_t seed,
                                 size_t borderline, ds_string** manifest_json);
DS_API ds_status ds_parse_mix(const char* text, double mix[4]);
/* One "kind<TAB>id<TAB>message" line per violation. */
DS_API ds_status ds_corpus_validate(const char* manifest_path, ds_string** violations,
                                    size_t* count);
/* counts[4] in label order; proportions may be NULL. */
DS_API ds_status ds_corpus_label_stats(const char* manifest_path, size_t counts[4],
                                       double proportions[4]);

/* Evaluation -------------------------------------------------------------------- */

/* Scores each method directory against the corpus and writes report.txt,
 * report.json and plots/ under out_dir. The table text is returned.
 * DS_ERR_MISSING_AUDIO when a method lacks items (ids in ds_last_error()). */
DS_API ds_status ds_eval_methods(const char* manifest_path, const char* const* method_dirs,
                                 size_t method_count, const char* out_dir, ds_string** table);
/* QA-vs-CoT row "label, qa%, cot%, qa_num, cot_num, total"; also writes
 * qa_cot.txt and qa_cot.json when out_dir is non-NULL. */
DS_API ds_status ds_eval_qa_cot(const char* manifest_path, const char* label, const char* out_dir,
                                ds_string** row);
/* Re-emits report files from a report JSON (the report.json schema). */
DS_API ds_status ds_report_emit(const char* report_json_path, const char* out_dir, ds_string** table);

#ifdef __cplusplus
}
#endif

#endif
