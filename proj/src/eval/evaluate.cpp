#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "deepsound/dataset.hpp"
#include "deepsound/eval.hpp"
#include "util/file_io.hpp"

namespace deepsound::eval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kEventBins = 16;

struct ItemFeatures {
  std::vector<Vector> embeddings;     // per embedder
  std::vector<Vector> probabilities;  // per classifier
  Vector events;                      // onset histogram
  double desync = 0.0;
};

struct Scorers {
  std::vector<std::unique_ptr<Embedder>> embedders = default_embedders();
  std::vector<std::unique_ptr<Classifier>> classifiers = default_classifiers();
};

ItemFeatures features(const Scorers& s, const audio::Waveform& w,
                      const detect::VideoDescriptor& video) {
  ItemFeatures f;
  for (const auto& e : s.embedders) f.embeddings.push_back(e->embed(w));
  for (const auto& c : s.classifiers) f.probabilities.push_back(c->probabilities(w));
  f.events = onset_histogram(detect_audio_onsets(w), video.duration, kEventBins);
  f.desync = desync_proxy(w, video.onset_times);
  return f;
}

// Runs body(i) for every index on a small pool; results are written by index
// so the reduction order never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::optional<fs::path> method_audio(const fs::path& dir, const std::string& id) {
  for (const auto& p : {dir / (id + ".wav"), dir / id / "final.wav"}) {
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::optional<std::map<std::string, Vector>> read_external(const fs::path& dir) {
  const auto path = dir / "embeddings.json";
  if (!fs::is_regular_file(path)) return std::nullopt;
  try {
    return json::parse(util::read_text_file(path)).get<std::map<std::string, Vector>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "invalid " + path.string() + ": " + e.what());
  }
}

EmbeddingSet external_set(const std::map<std::string, Vector>& table,
                          const std::vector<std::string>& ids, const std::string& source) {
  EmbeddingSet set{{}, source};
  for (const auto& id : ids) {
    const auto it = table.find(id);
    if (it == table.end()) throw Error(ErrorKind::pairing, source + " has no embedding for " + id);
    set.vectors.push_back(it->second);
  }
  return set;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
  return out;
}

}  // namespace

MissingAudioError::MissingAudioError(std::string method, std::vector<std::string> ids)
    : Error(ErrorKind::io, "method '" + method + "' is missing audio for: " + join_ids(ids)),
      method_(std::move(method)),
      ids_(std::move(ids)) {}

MetricReport evaluate_methods(const fs::path& corpus_manifest, const std::vector<fs::path>& method_dirs,
                              const EvalOptions& options) {
  if (method_dirs.empty()) throw Error(ErrorKind::argument, "no method directories given");
  const auto corpus = dataset::read_manifest(corpus_manifest);
  const std::size_t n = corpus.items.size();
  if (n < 2) throw Error(ErrorKind::insufficient_samples, "evaluation needs at least 2 corpus items");

  std::vector<std::string> ids;
  for (const auto& it : corpus.items) ids.push_back(it.id);

  // Resolve every method's files first so that all gaps are reported together.
  std::vector<std::vector<fs::path>> method_files;
  for (const auto& dir : method_dirs) {
    std::vector<fs::path> files;
    std::vector<std::string> missing;
    for (const auto& id : ids) {
      if (auto p = method_audio(dir, id)) {
        files.push_back(*p);
      } else {
        missing.push_back(id);
      }
    }
    if (!missing.empty()) throw MissingAudioError(dir.filename().string(), missing);
    method_files.push_back(std::move(files));
  }

  const Scorers scorers;
  std::vector<detect::VideoDescriptor> videos(n);
  std::vector<ItemFeatures> reference(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    videos[i] = detect::read_descriptor(corpus.resolve(corpus.items[i].descriptor));
    reference[i] = features(scorers, audio::read_wav(corpus.resolve(corpus.items[i].audio)), videos[i]);
  });

  MetricReport report;
  for (const auto& e : scorers.embedders) report.embedders.push_back(e->id());
  for (const auto& c : scorers.classifiers) report.classifiers.push_back(c->id());

  auto ref_external = read_external(corpus.root);
  std::vector<std::optional<std::map<std::string, Vector>>> method_external;
  bool use_external = ref_external.has_value();
  for (const auto& dir : method_dirs) {
    method_external.push_back(read_external(dir));
    use_external = use_external && method_external.back().has_value();
  }
  if (use_external) report.embedders.push_back("ext");

  std::vector<GaussianStats> ref_stats;
  for (std::size_t e = 0; e < scorers.embedders.size(); ++e) {
    EmbeddingSet set{{}, "reference"};
    for (const auto& f : reference) set.vectors.push_back(f.embeddings[e]);
    ref_stats.push_back(gaussian_stats(set));
  }
  if (use_external) ref_stats.push_back(gaussian_stats(external_set(*ref_external, ids, "reference")));

  EmbeddingSet video_events{{}, "video"};
  for (const auto& v : videos) video_events.vectors.push_back(onset_histogram(v.onset_times, v.duration, kEventBins));

  for (std::size_t m = 0; m < method_dirs.size(); ++m) {
    std::vector<ItemFeatures> feats(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
      feats[i] = features(scorers, audio::read_wav(method_files[m][i]), videos[i]);
    });

    MethodRow row;
    row.method = method_dirs[m].filename().string();
    if (row.method.empty()) row.method = method_dirs[m].parent_path().filename().string();
    for (std::size_t e = 0; e < scorers.embedders.size(); ++e) {
      EmbeddingSet set{{}, row.method};
      for (const auto& f : feats) set.vectors.push_back(f.embeddings[e]);
      row.fd.push_back(frechet_distance(ref_stats[e], gaussian_stats(set)));
    }
    if (use_external) {
      row.fd.push_back(frechet_distance(ref_stats.back(),
                                        gaussian_stats(external_set(*method_external[m], ids, row.method))));
    }
    for (std::size_t c = 0; c < scorers.classifiers.size(); ++c) {
      std::vector<ProbPair> pairs;
      for (std::size_t i = 0; i < n; ++i) {
        pairs.emplace_back(reference[i].probabilities[c], feats[i].probabilities[c]);
      }
      row.kl.push_back(kl_divergence(pairs));
    }
    std::vector<Vector> probs;
    for (const auto& f : feats) probs.push_back(f.probabilities.front());
    row.is = inception_score(probs);

    EmbeddingSet audio_events{{}, row.method};
    double desync = 0.0;
    for (const auto& f : feats) {
      audio_events.vectors.push_back(f.events);
      desync += f.desync;
    }
    row.ib = ib_score(video_events, audio_events);
    row.desync = desync / static_cast<double>(n);
    report.rows.push_back(std::move(row));
  }
  report.validate();
  return report;
}

QaCotReport evaluate_qa_cot(const fs::path& corpus_manifest) {
  const auto corpus = dataset::read_manifest(corpus_manifest);
  std::vector<JudgedItem> items;
  for (const auto& it : corpus.items) {
    items.push_back({detect::read_descriptor(corpus.resolve(it.descriptor)),
                     audio::read_wav(corpus.resolve(it.audio))});
  }
  return qa_cot_report(items);
}

}  // namespace deepsound::eval
