#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deepsound/audio.hpp"
#include "deepsound/detect.hpp"

namespace deepsound::eval {

using Vector = std::vector<double>;

struct EmbeddingSet {
  std::vector<Vector> vectors;
  std::string source_id;

  std::size_t dim() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }
  /// Throws Error(shape) on ragged or non-finite vectors.
  void validate() const;
};

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;
};

// Embedders and classifiers ------------------------------------------------------

inline constexpr std::size_t kToyDim = 16;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Vector embed(const audio::Waveform& w) const = 0;
};

/// Toy spectral embedder. Layout: 8 log band levels (0.5*ln of mean per-frame
/// band energy, octave bands from 62.5 Hz), 4 mean absolute temporal deltas
/// of those levels pooled over band pairs, ln RMS, then zero padding to 16.
class ToyEmbedder final : public Embedder {
 public:
  explicit ToyEmbedder(std::size_t frame_len = audio::kDefaultFrameLen);
  std::string id() const override;
  std::size_t dim() const override { return kToyDim; }
  Vector embed(const audio::Waveform& w) const override;

 private:
  std::size_t frame_len_;
};

/// ToyEmbedder with the default 1024-sample frame.
Vector toy_embedder(const audio::Waveform& w);

/// The three FD embedders used in reports (512, 1024 and 2048-sample frames).
std::vector<std::unique_ptr<Embedder>> default_embedders();

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string id() const = 0;
  virtual std::size_t classes() const = 0;
  virtual Vector probabilities(const audio::Waveform& w) const = 0;
};

/// Softmax over the eight toy band levels ("band8") or over their four pair
/// means ("band4"). Both are invariant to global gain.
class BandClassifier final : public Classifier {
 public:
  explicit BandClassifier(std::size_t classes = 8);
  std::string id() const override;
  std::size_t classes() const override { return classes_; }
  Vector probabilities(const audio::Waveform& w) const override;

 private:
  std::size_t classes_;
};

std::vector<std::unique_ptr<Classifier>> default_classifiers();

// Metrics ---------------------------------------------------------------------------

/// Sample mean and unbiased covariance, symmetrised with eigenvalues clamped
/// at zero. Throws Error(insufficient_samples) for n < 2.
GaussianStats gaussian_stats(const EmbeddingSet& e);

double frechet_distance(const GaussianStats& g1, const GaussianStats& g2);

using ProbPair = std::pair<Vector, Vector>;

/// Mean of KL(p || q) over pairs; q is floored at 1e-10.
double kl_divergence(const std::vector<ProbPair>& pairs);

/// Single-split Inception Score.
double inception_score(const std::vector<Vector>& probs);

/// Mean paired cosine similarity; a pair containing a zero vector scores 0.
double ib_score(const EmbeddingSet& video_embs, const EmbeddingSet& audio_embs);

inline constexpr double kDesyncCap = 1.0;

/// Energy-onset times: 20 ms frames, 10 ms hop; onset where the rise in mean
/// frame power is a local maximum above 3x the median absolute rise and above
/// an absolute floor, with a 150 ms refractory gap.
std::vector<double> detect_audio_onsets(const audio::Waveform& w);

/// Mean distance from each visual onset to the nearest audio onset, capped.
double desync_proxy(const audio::Waveform& w, const std::vector<double>& onsets);

/// Normalised histogram of event times over [0, duration) used as the
/// event-alignment embedding for the IB proxy.
Vector onset_histogram(const std::vector<double>& times, double duration, std::size_t bins = 16);

// Reports -----------------------------------------------------------------------------

enum class Direction { lower_better, higher_better };

/// (direct - ours)/direct for lower-is-better metrics, (ours - direct)/direct
/// otherwise, in percent. NaN when direct is 0.
double improvement_pct(double direct, double ours, Direction direction);

struct MethodRow {
  std::string method;
  std::vector<double> fd;  // one per embedder
  std::vector<double> kl;  // one per classifier
  double is = 1.0;
  double ib = 0.0;
  double desync = 0.0;
};

struct MetricReport {
  std::vector<std::string> embedders;
  std::vector<std::string> classifiers;
  std::vector<MethodRow> rows;

  /// Throws Error(shape) on column mismatches and Error(argument) on values
  /// outside their metric range.
  void validate() const;
};

struct MetricColumn {
  std::string name;
  Direction direction;
  double MethodRow::*scalar = nullptr;  // set for IS / IB / DeSync
  std::size_t index = 0;                // fd or kl slot otherwise
  bool is_fd = false;
};

std::vector<MetricColumn> report_columns(const MetricReport& report);
double column_value(const MethodRow& row, const MetricColumn& column);

/// The reference row for improvements: the "Direct" row if present, else the first.
const MethodRow& reference_row(const MetricReport& report);

std::string render_report_table(const MetricReport& report);
std::string report_to_json(const MetricReport& report);
MetricReport parse_report_json(std::string_view text);

/// Writes report.txt, report.json and plots/<metric>.csv under out_dir.
void emit_report(const MetricReport& report, const std::filesystem::path& out_dir);

// QA vs CoT -------------------------------------------------------------------------------

struct QaCotReport {
  double qa_ratio = 0.0;
  double cot_ratio = 0.0;
  std::size_t qa_num = 0;
  std::size_t cot_num = 0;
  std::size_t total = 0;
};

struct JudgedItem {
  detect::VideoDescriptor video;
  audio::Waveform audio;
};

QaCotReport qa_cot_report(const std::vector<JudgedItem>& items);

/// "label, qa%, cot%, qa_num, cot_num, total" with ratios as percentages.
std::string format_qa_cot_row(const std::string& label, const QaCotReport& report);

// Corpus evaluation ------------------------------------------------------------------

/// Method directory lacked audio for some corpus items.
class MissingAudioError : public Error {
 public:
  MissingAudioError(std::string method, std::vector<std::string> ids);
  const std::string& method() const noexcept { return method_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::string method_;
  std::vector<std::string> ids_;
};

struct EvalOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Scores every method directory against the corpus ground truth. A method
/// directory holds <id>.wav or <id>/final.wav per item; the row label is the
/// directory name. When the corpus root and every method directory carry an
/// `embeddings.json` ({id: [floats]}), an extra "ext" FD column is added.
MetricReport evaluate_methods(const std::filesystem::path& corpus_manifest,
                              const std::vector<std::filesystem::path>& method_dirs,
                              const EvalOptions& options = {});

QaCotReport evaluate_qa_cot(const std::filesystem::path& corpus_manifest);

}  // namespace deepsound::eval
