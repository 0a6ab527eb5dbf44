#include <algorithm>
#include <cmath>

#include "deepsound/eval.hpp"

namespace deepsound::eval {
namespace {

constexpr std::size_t kBands = 8;
constexpr std::size_t kPooled = kBands / 2;
// Floors are relative to the mean frame energy so that a gain change moves
// every energy coordinate by exactly ln|c|.
constexpr double kRelativeFloor = 1e-12;

Vector softmax(const Vector& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - peak);
  for (auto& x : out) x /= sum;
  return out;
}

}  // namespace

ToyEmbedder::ToyEmbedder(std::size_t frame_len) : frame_len_(frame_len) {
  if (!audio::is_power_of_two(frame_len) || frame_len < 64) {
    throw Error(ErrorKind::argument, "toy embedder frame must be a power of two >= 64");
  }
}

std::string ToyEmbedder::id() const { return "toy_f" + std::to_string(frame_len_); }

Vector ToyEmbedder::embed(const audio::Waveform& input) const {
  if (input.empty()) throw Error(ErrorKind::empty_input, "cannot embed an empty waveform");
  const double level = audio::rms(input.samples());
  if (!(level > 0.0)) throw Error(ErrorKind::empty_input, "cannot embed a zero-energy waveform");

  audio::Waveform w = input;
  if (w.size() < frame_len_) w.data().resize(frame_len_, 0.0f);
  const auto spec = audio::stft(w, frame_len_, frame_len_ / 4);
  const auto bands = audio::BandSet::log_spaced(kBands, w.sample_rate(), 2.0);

  std::vector<std::vector<double>> per_frame;
  for (const auto& band : bands.bands()) per_frame.push_back(audio::band_energy_per_frame(spec, band));
  const double floor = kRelativeFloor * audio::total_energy(spec) / static_cast<double>(spec.frames);

  Vector out(kToyDim, 0.0);
  std::array<double, kBands> delta{};
  for (std::size_t b = 0; b < kBands; ++b) {
    const auto& e = per_frame[b];
    double mean = 0.0;
    for (double x : e) mean += x;
    mean /= static_cast<double>(e.size());
    out[b] = 0.5 * std::log(mean + floor);

    for (std::size_t f = 1; f < e.size(); ++f) {
      delta[b] += std::abs(0.5 * std::log(e[f] + floor) - 0.5 * std::log(e[f - 1] + floor));
    }
    if (e.size() > 1) delta[b] /= static_cast<double>(e.size() - 1);
  }
  for (std::size_t p = 0; p < kPooled; ++p) out[kBands + p] = 0.5 * (delta[2 * p] + delta[2 * p + 1]);
  out[kBands + kPooled] = std::log(level);
  return out;
}

Vector toy_embedder(const audio::Waveform& w) { return ToyEmbedder().embed(w); }

std::vector<std::unique_ptr<Embedder>> default_embedders() {
  std::vector<std::unique_ptr<Embedder>> out;
  for (std::size_t f : {512u, 1024u, 2048u}) out.push_back(std::make_unique<ToyEmbedder>(f));
  return out;
}

BandClassifier::BandClassifier(std::size_t classes) : classes_(classes) {
  if (classes != kBands && classes != kPooled) {
    throw Error(ErrorKind::argument, "band classifier supports 8 or 4 classes");
  }
}

std::string BandClassifier::id() const { return "band" + std::to_string(classes_); }

Vector BandClassifier::probabilities(const audio::Waveform& w) const {
  const auto emb = toy_embedder(w);
  Vector logits(emb.begin(), emb.begin() + kBands);
  if (classes_ == kPooled) {
    Vector pooled(kPooled);
    for (std::size_t p = 0; p < kPooled; ++p) pooled[p] = 0.5 * (logits[2 * p] + logits[2 * p + 1]);
    logits = std::move(pooled);
  }
  return softmax(logits);
}

std::vector<std::unique_ptr<Classifier>> default_classifiers() {
  std::vector<std::unique_ptr<Classifier>> out;
  out.push_back(std::make_unique<BandClassifier>(kBands));
  out.push_back(std::make_unique<BandClassifier>(kPooled));
  return out;
}

}  // namespace deepsound::eval
