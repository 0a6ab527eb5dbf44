// Command-line front end; talks to the library only through the C API.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deepsound/deepsound.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kValidation = 1, kUsage = 2, kBackend = 3 };

struct StringDeleter {
  void operator()(ds_string* s) const { ds_string_free(s); }
};
using OwnedString = std::unique_ptr<ds_string, StringDeleter>;

int exit_for(ds_status status) {
  switch (status) {
    case DS_OK: return kOk;
    case DS_ERR_IO:
    case DS_ERR_BACKEND:
    case DS_ERR_INTERNAL: return kBackend;
    default: return kValidation;
  }
}

int report_failure(ds_status status) {
  std::cout << "error (" << ds_status_name(status) << "): " << ds_last_error() << "\n";
  return exit_for(status);
}

std::string strategy_vocabulary() {
  std::string out;
  for (size_t i = 0; i < ds_strategy_count(); ++i) {
    out += std::string(i ? ", " : "") + ds_strategy_name(i) + " (" + ds_strategy_label(i) + ")";
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunArgs {
  std::string video;
  std::string strategy = "s3";
  std::string mode = "CoT";
  std::string out = "out";
  uint64_t seed = 0;
  std::string endpoint;
  std::string backend;
  std::string instruction = "Generate audio from video.";
  std::string negative_prompt = "human voice";
  double timeout = 120.0;
  double bar_len = 1.0;
  double silence_threshold = -60.0;
};

int cmd_run(const RunArgs& a) {
  if (!ds_strategy_valid(a.strategy.c_str())) {
    std::cout << "unknown strategy '" << a.strategy << "'; valid strategies: " << strategy_vocabulary()
              << "\n";
    return kUsage;
  }
  if (!ds_mode_valid(a.mode.c_str())) {
    std::cout << "unknown mode '" << a.mode << "'; valid modes: QA, CoT\n";
    return kUsage;
  }

  ds_video* video = nullptr;
  if (auto st = ds_video_read(a.video.c_str(), &video); st != DS_OK) return report_failure(st);
  std::unique_ptr<ds_video, void (*)(ds_video*)> video_guard(video, ds_video_free);

  ds_config* config = nullptr;
  ds_config_create(&config);
  std::unique_ptr<ds_config, void (*)(ds_config*)> config_guard(config, ds_config_free);
  const std::string backend = !a.backend.empty() ? a.backend : (a.endpoint.empty() ? "stub" : "http");
  for (ds_status st : {ds_config_set_strategy(config, a.strategy.c_str()),
                       ds_config_set_mode(config, a.mode.c_str()), ds_config_set_seed(config, a.seed),
                       ds_config_set_backend(config, backend.c_str()),
                       ds_config_set_endpoint(config, a.endpoint.c_str()),
                       ds_config_set_timeout(config, a.timeout),
                       ds_config_set_negative_prompt(config, a.negative_prompt.c_str()),
                       ds_config_set_bar_len(config, a.bar_len),
                       ds_config_set_silence_threshold(config, a.silence_threshold)}) {
    if (st != DS_OK) {
      std::cout << "error: " << ds_last_error() << "\n";
      return kUsage;
    }
  }

  ds_run* run = nullptr;
  if (auto st = ds_run_pipeline(video, a.instruction.c_str(), config, a.out.c_str(), &run);
      st != DS_OK) {
    return report_failure(st);
  }
  std::unique_ptr<ds_run, void (*)(ds_run*)> run_guard(run, ds_run_free);
  const char* label = ds_run_label(run);
  std::cout << "verdict: " << (label ? label : "n/a (no detection step)") << "\n";
  char line[512];
  std::snprintf(line, sizeof line, "strategy: %s removal=%s silent_bars=%zu final=%.3fs dir=%s",
                ds_run_strategy(run), ds_run_removal_applied(run) ? "applied" : "skipped",
                ds_run_silent_bar_count(run), ds_run_final_duration(run), ds_run_directory(run));
  std::cout << line << "\n";
  return kOk;
}

struct EvalArgs {
  std::string corpus;
  std::vector<std::string> methods;
  std::string out = "eval_out";
  bool qa_cot = false;
  std::string label = "stub";
};

int cmd_eval(const EvalArgs& a) {
  if (!a.qa_cot && a.methods.empty()) {
    std::cout << "eval needs --methods or --qa-cot\n";
    return kUsage;
  }
  int code = kOk;
  if (!a.methods.empty()) {
    std::vector<const char*> dirs;
    for (const auto& m : a.methods) dirs.push_back(m.c_str());
    ds_string* table = nullptr;
    const auto st = ds_eval_methods(a.corpus.c_str(), dirs.data(), dirs.size(), a.out.c_str(), &table);
    if (st != DS_OK) return report_failure(st);
    OwnedString guard(table);
    std::cout << ds_string_data(table);
  }
  if (a.qa_cot) {
    ds_string* row = nullptr;
    const auto st = ds_eval_qa_cot(a.corpus.c_str(), a.label.c_str(), a.out.c_str(), &row);
    if (st != DS_OK) return report_failure(st);
    OwnedString guard(row);
    std::cout << "Method, QA Ratio, CoT Ratio, QA Num, CoT Num, Total\n" << ds_string_data(row) << "\n";
  }
  return code;
}

int cmd_cot_validate(const std::vector<std::string>& paths, bool structure) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.emplace_back(p);
    } else {
      std::cout << "error (io): no such file or directory: " << p << "\n";
      return kBackend;
    }
  }
  bool any_failed = false;
  for (const auto& f : files) {
    const auto text = read_file(f);
    ds_string* out = nullptr;
    const auto st = structure ? ds_cot_structure_canonical(text.c_str(), &out)
                              : ds_cot_detail_canonical(text.c_str(), &out);
    OwnedString guard(out);
    if (st == DS_OK) {
      std::cout << "PASS " << f.string() << "\n";
      continue;
    }
    any_failed = true;
    std::cout << "FAIL " << f.string() << ": ";
    if (*ds_last_error_tag()) std::cout << "[" << ds_last_error_tag() << "] ";
    std::cout << ds_last_error() << "\n";
  }
  return any_failed ? kValidation : kOk;
}

struct DatasetArgs {
  size_t n = 180;
  std::string mix = "0.25,0.25,0.25,0.25";
  uint64_t seed = 0;
  std::string out = "corpus";
  size_t borderline = 0;
};

int print_stats(const std::string& manifest) {
  size_t counts[4];
  double props[4];
  if (auto st = ds_corpus_label_stats(manifest.c_str(), counts, props); st != DS_OK) {
    return report_failure(st);
  }
  const char* names[4] = {"Yes", "No1", "No2", "No3"};
  for (int i = 0; i < 4; ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%-4s %6zu  %.4f", names[i], counts[i], props[i]);
    std::cout << line << "\n";
  }
  return kOk;
}

int cmd_dataset_gen(const DatasetArgs& a) {
  double mix[4];
  if (auto st = ds_parse_mix(a.mix.c_str(), mix); st != DS_OK) {
    std::cout << "error: " << ds_last_error() << "\n";
    return kUsage;
  }
  if (auto st = ds_corpus_build(a.out.c_str(), a.n, mix, a.seed, a.borderline, nullptr); st != DS_OK) {
    return report_failure(st);
  }
  const auto manifest = (fs::path(a.out) / "manifest.json").string();
  std::cout << "wrote " << a.n << " items to " << manifest << "\n";
  return print_stats(manifest);
}

int cmd_dataset_validate(const std::string& manifest) {
  ds_string* text = nullptr;
  size_t count = 0;
  if (auto st = ds_corpus_validate(manifest.c_str(), &text, &count); st != DS_OK) {
    return report_failure(st);
  }
  OwnedString guard(text);
  std::cout << ds_string_data(text);
  std::cout << count << " violation(s)\n";
  if (count > 0) return kValidation;
  return print_stats(manifest);
}

int cmd_report(const std::string& input, const std::string& out) {
  ds_string* table = nullptr;
  if (auto st = ds_report_emit(input.c_str(), out.c_str(), &table); st != DS_OK) {
    return report_failure(st);
  }
  OwnedString guard(table);
  std::cout << ds_string_data(table);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepsound: video-to-audio pipeline with voice-over detection and removal"};
  app.footer("Strategies: " + strategy_vocabulary() +
             "\nModes: QA, CoT\nEnvironment: DEEPSOUND_V2A_ENDPOINT overrides the HTTP backend endpoint."
             "\nExit codes: 0 ok, 1 validation failure, 2 usage error, 3 backend or I/O error.");
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline on one video descriptor");
  run_cmd->add_option("--video", run.video, "Video descriptor JSON")->required();
  run_cmd->add_option("--strategy", run.strategy, "One of: " + strategy_vocabulary());
  run_cmd->add_option("--mode", run.mode, "Detector mode: QA or CoT");
  run_cmd->add_option("--out", run.out, "Output root; the run lands in <out>/<video_id>/<strategy>/");
  run_cmd->add_option("--seed", run.seed, "Generation seed");
  run_cmd->add_option("--endpoint", run.endpoint, "HTTP V2A endpoint (selects the http backend)");
  run_cmd->add_option("--backend", run.backend, "Backend id: stub or http");
  run_cmd->add_option("--instruction", run.instruction, "Generation instruction / prompt");
  run_cmd->add_option("--negative-prompt", run.negative_prompt, "Negative prompt");
  run_cmd->add_option("--timeout", run.timeout, "Backend request timeout in seconds");
  run_cmd->add_option("--bar-len", run.bar_len, "Silence-check bar length in seconds");
  run_cmd->add_option("--silence-threshold", run.silence_threshold, "Silence threshold in dBFS");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score method outputs against a corpus");
  eval_cmd->add_option("--corpus", ev.corpus, "Corpus manifest.json")->required();
  eval_cmd->add_option("--methods", ev.methods, "Method directories holding <id>.wav files");
  eval_cmd->add_option("--out", ev.out, "Report output directory");
  eval_cmd->add_flag("--qa-cot", ev.qa_cot, "Also compute the QA-vs-CoT detection table");
  eval_cmd->add_option("--label", ev.label, "Row label for the QA-vs-CoT table");

  std::vector<std::string> cot_paths;
  bool structure = false;
  auto* cot_cmd = app.add_subcommand("cot-validate", "Validate reasoning documents (files or directories)");
  cot_cmd->add_option("paths", cot_paths, "Files or directories of .txt documents")->required();
  cot_cmd->add_flag("--structure", structure, "Validate plan documents instead of detail documents");

  DatasetArgs ds;
  auto* ds_cmd = app.add_subcommand("dataset-gen", "Generate a synthetic labelled corpus");
  ds_cmd->add_option("--n", ds.n, "Item count");
  ds_cmd->add_option("--mix", ds.mix, "Proportions for Yes,No1,No2,No3");
  ds_cmd->add_option("--seed", ds.seed, "Corpus seed");
  ds_cmd->add_option("--out", ds.out, "Corpus directory");
  ds_cmd->add_option("--borderline", ds.borderline, "Extra Yes items only the CoT profile detects");

  std::string manifest;
  auto* dv_cmd = app.add_subcommand("dataset-validate", "Check a corpus manifest and print label stats");
  dv_cmd->add_option("manifest", manifest, "Corpus manifest.json")->required();

  std::string report_in;
  std::string report_out = "report_out";
  auto* rep_cmd = app.add_subcommand("report", "Render report files from a metric report JSON");
  rep_cmd->add_option("--input", report_in, "Report JSON (report.json schema)")->required();
  rep_cmd->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*run_cmd) return cmd_run(run);
  if (*eval_cmd) return cmd_eval(ev);
  if (*cot_cmd) return cmd_cot_validate(cot_paths, structure);
  if (*ds_cmd) return cmd_dataset_gen(ds);
  if (*dv_cmd) return cmd_dataset_validate(manifest);
  if (*rep_cmd) return cmd_report(report_in, report_out);
  return kUsage;
}
