#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "deepsound/eval.hpp"

namespace deepsound::eval {
namespace {

constexpr double kProbFloor = 1e-10;
constexpr double kNormTolerance = 1e-6;

// Onset detector framing.
constexpr double kOnsetFrame = 0.020;
constexpr double kOnsetHop = 0.010;
constexpr double kOnsetMedianFactor = 3.0;
constexpr double kOnsetFloor = 1e-6;
constexpr double kOnsetRefractory = 0.150;

void check_distribution(const Vector& p) {
  if (p.empty()) throw Error(ErrorKind::normalization, "empty probability vector");
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorKind::normalization, "probabilities must be finite and non-negative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw Error(ErrorKind::normalization,
                "probability vector sums to " + std::to_string(sum) + ", not 1");
  }
}

// Symmetric PSD square root through eigendecomposition, negatives clamped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::VectorXd vals = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * vals.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

void EmbeddingSet::validate() const {
  const auto d = dim();
  for (const auto& v : vectors) {
    if (v.size() != d) throw Error(ErrorKind::shape, "embedding set has ragged dimensions");
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(ErrorKind::shape, "embedding contains a non-finite value");
    }
  }
}

GaussianStats gaussian_stats(const EmbeddingSet& e) {
  e.validate();
  const std::size_t n = e.vectors.size();
  if (n < 2) throw Error(ErrorKind::insufficient_samples, "gaussian_stats needs at least 2 vectors");
  const auto d = static_cast<Eigen::Index>(e.dim());

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = e.vectors[i][static_cast<std::size_t>(j)];
  }
  GaussianStats g;
  g.n = n;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd vals = solver.eigenvalues().cwiseMax(0.0);
  g.cov = solver.eigenvectors() * vals.asDiagonal() * solver.eigenvectors().transpose();
  g.cov = 0.5 * (g.cov + g.cov.transpose());
  return g;
}

double frechet_distance(const GaussianStats& g1, const GaussianStats& g2) {
  if (g1.mean.size() != g2.mean.size() || g1.cov.rows() != g2.cov.rows() ||
      g1.cov.rows() != g1.mean.size()) {
    throw Error(ErrorKind::shape, "Gaussian statistics have different dimensions");
  }
  const double mean_term = (g1.mean - g2.mean).squaredNorm();
  const Eigen::MatrixXd s2 = psd_sqrt(g2.cov);
  Eigen::MatrixXd inner = s2 * g1.cov * s2;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = psd_sqrt(inner).trace();
  double trace_term = g1.cov.trace() + g2.cov.trace() - 2.0 * cross;
  if (trace_term < 0.0 && trace_term > -1e-8) trace_term = 0.0;
  return std::max(0.0, mean_term + trace_term);
}

double kl_divergence(const std::vector<ProbPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::empty_input, "kl_divergence needs at least one pair");
  double total = 0.0;
  for (const auto& [p, q] : pairs) {
    check_distribution(p);
    check_distribution(q);
    if (p.size() != q.size()) throw Error(ErrorKind::shape, "KL pair has different class counts");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
    }
    total += std::max(0.0, kl);
  }
  return total / static_cast<double>(pairs.size());
}

double inception_score(const std::vector<Vector>& probs) {
  if (probs.empty()) throw Error(ErrorKind::empty_input, "inception_score needs at least one vector");
  const std::size_t c = probs.front().size();
  Vector marginal(c, 0.0);
  for (const auto& p : probs) {
    check_distribution(p);
    if (p.size() != c) throw Error(ErrorKind::shape, "probability vectors differ in class count");
    for (std::size_t i = 0; i < c; ++i) marginal[i] += p[i];
  }
  for (auto& m : marginal) m /= static_cast<double>(probs.size());

  double mean_kl = 0.0;
  for (const auto& p : probs) {
    double kl = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(marginal[i], kProbFloor));
    }
    mean_kl += std::max(0.0, kl);
  }
  mean_kl /= static_cast<double>(probs.size());
  return std::clamp(std::exp(mean_kl), 1.0, static_cast<double>(c));
}

double ib_score(const EmbeddingSet& video_embs, const EmbeddingSet& audio_embs) {
  if (video_embs.vectors.size() != audio_embs.vectors.size()) {
    throw Error(ErrorKind::pairing, "video and audio embedding counts differ");
  }
  if (video_embs.vectors.empty()) throw Error(ErrorKind::empty_input, "ib_score needs at least one pair");
  video_embs.validate();
  audio_embs.validate();
  if (video_embs.dim() != audio_embs.dim()) {
    throw Error(ErrorKind::shape, "video and audio embeddings differ in dimension");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < video_embs.vectors.size(); ++i) {
    const auto& a = video_embs.vectors[i];
    const auto& b = audio_embs.vectors[i];
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
    const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
    if (na > 0.0 && nb > 0.0) total += std::clamp(dot / (na * nb), -1.0, 1.0);
  }
  return total / static_cast<double>(video_embs.vectors.size());
}

std::vector<double> detect_audio_onsets(const audio::Waveform& w) {
  const auto frame = static_cast<std::size_t>(std::llround(kOnsetFrame * w.sample_rate()));
  const auto hop = static_cast<std::size_t>(std::llround(kOnsetHop * w.sample_rate()));
  if (w.size() < frame + hop) return {};

  std::vector<double> power;
  for (std::size_t start = 0; start + frame <= w.size(); start += hop) {
    power.push_back(audio::energy(w.samples().subspan(start, frame)) / static_cast<double>(frame));
  }
  std::vector<double> rise(power.size(), 0.0);
  for (std::size_t i = 1; i < power.size(); ++i) rise[i] = power[i] - power[i - 1];

  std::vector<double> magnitudes;
  for (std::size_t i = 1; i < rise.size(); ++i) magnitudes.push_back(std::abs(rise[i]));
  auto mid = magnitudes.begin() + static_cast<std::ptrdiff_t>(magnitudes.size() / 2);
  std::nth_element(magnitudes.begin(), mid, magnitudes.end());
  const double threshold = std::max(kOnsetMedianFactor * *mid, kOnsetFloor);

  std::vector<double> onsets;
  double last = -1e9;
  for (std::size_t i = 1; i < rise.size(); ++i) {
    const double prev = rise[i - 1];
    const double next = i + 1 < rise.size() ? rise[i + 1] : -1e300;
    if (rise[i] <= threshold || rise[i] < prev || rise[i] <= next) continue;
    const double t = static_cast<double>(i * hop) / w.sample_rate();
    if (t - last < kOnsetRefractory) continue;
    onsets.push_back(t);
    last = t;
  }
  return onsets;
}

double desync_proxy(const audio::Waveform& w, const std::vector<double>& onsets) {
  const auto audio_onsets = detect_audio_onsets(w);
  if (audio_onsets.empty()) return kDesyncCap;
  if (onsets.empty()) return 0.0;
  double total = 0.0;
  for (double v : onsets) {
    double best = kDesyncCap;
    for (double a : audio_onsets) best = std::min(best, std::abs(a - v));
    total += best;
  }
  return total / static_cast<double>(onsets.size());
}

Vector onset_histogram(const std::vector<double>& times, double duration, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::argument, "histogram needs at least one bin");
  if (!(duration > 0.0)) throw Error(ErrorKind::argument, "histogram duration must be positive");
  Vector h(bins, 0.0);
  std::size_t counted = 0;
  for (double t : times) {
    if (t < 0.0 || t >= duration) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>(t / duration * static_cast<double>(bins)));
    h[b] += 1.0;
    ++counted;
  }
  if (counted > 0) {
    for (auto& x : h) x /= static_cast<double>(counted);
  }
  return h;
}

double improvement_pct(double direct, double ours, Direction direction) {
  if (direct == 0.0) return std::nan("");
  const double delta = direction == Direction::lower_better ? direct - ours : ours - direct;
  return 100.0 * delta / direct;
}

}  // namespace deepsound::eval
