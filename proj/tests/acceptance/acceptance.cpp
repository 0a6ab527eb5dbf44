// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cot_fixtures.hpp"
#include "deepsound/dataset.hpp"
#include "deepsound/edit.hpp"
#include "deepsound/eval.hpp"
#include "deepsound/pipeline.hpp"
#include "fixtures.hpp"
#include "mock_server.hpp"

using namespace deepsound;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Returns whatever waveform it was built with, for driving the pipeline on
// corpus audio.
class FixedBackend final : public pipeline::V2ABackend {
 public:
  explicit FixedBackend(audio::Waveform w) : w_(std::move(w)) {}
  std::string id() const override { return "fixed"; }
  audio::Waveform generate(const pipeline::V2ARequest&) const override { return w_; }

 private:
  audio::Waveform w_;
};

eval::Vector random_probs(std::mt19937& rng, std::size_t c) {
  std::gamma_distribution<double> g(0.4, 1.0);
  eval::Vector p(c);
  double sum = 0.0;
  for (auto& x : p) sum += (x = g(rng) + 1e-12);
  for (auto& x : p) x /= sum;
  return p;
}

eval::EmbeddingSet random_set(std::mt19937& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  eval::EmbeddingSet s{{}, "r"};
  for (std::size_t i = 0; i < n; ++i) {
    eval::Vector v(d);
    for (auto& x : v) x = g(rng);
    s.vectors.push_back(v);
  }
  return s;
}

eval::GaussianStats gauss1d(double mean, double var) {
  eval::GaussianStats g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.cov = Eigen::MatrixXd::Constant(1, 1, var);
  return g;
}

Outcome taxonomy() {
  Outcome o;
  struct Row { bool person, voice; VerdictLabel label; };
  const Row rows[] = {{false, true, VerdictLabel::yes}, {false, false, VerdictLabel::no1},
                      {true, true, VerdictLabel::no2}, {true, false, VerdictLabel::no3}};
  int hits = 0;
  for (const auto& r : rows) hits += detect::classify_voiceover(r.person, r.voice) == r.label;
  o.require(hits == 4, std::to_string(hits) + "/4 rows");
  if (o.pass) o.detail = "4/4 rows";
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  const double fd1 = eval::frechet_distance(gauss1d(0, 1), gauss1d(1, 1));
  const double fd2 = eval::frechet_distance(gauss1d(0, 1), gauss1d(0, 4));
  o.require(std::abs(fd1 - 1.0) <= 1e-9, "FD mean shift " + fmt("%.12f", fd1));
  o.require(std::abs(fd2 - 1.0) <= 1e-9, "FD variance " + fmt("%.12f", fd2));
  const double kl = eval::kl_divergence({{{0.5, 0.5}, {0.25, 0.75}}});
  o.require(std::abs(kl - 0.1438) <= 1e-3, "KL " + fmt("%.5f", kl));
  std::mt19937 rng(10);
  int in_bounds = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t c = 2 + rng() % 9;
    const std::size_t n = 1 + rng() % 20;
    std::vector<eval::Vector> rows;
    for (std::size_t j = 0; j < n; ++j) rows.push_back(random_probs(rng, c));
    const double is = eval::inception_score(rows);
    in_bounds += is >= 1.0 && is <= static_cast<double>(c);
  }
  o.require(in_bounds == 1000, "IS bounds " + std::to_string(in_bounds) + "/1000");
  if (o.pass) o.detail = "FD " + fmt("%.3g", fd1) + "/" + fmt("%.3g", fd2) + ", KL " + fmt("%.4f", kl) + ", IS 1000/1000";
  return o;
}

Outcome identity_suite() {
  Outcome o;
  std::mt19937 rng(11);
  const auto gold = cot::parse_cot_detail(fixtures::kGoldDoc);
  {
    const auto s = eval::gaussian_stats(random_set(rng, 12, 4));
    o.require(std::abs(eval::frechet_distance(s, s)) <= 1e-9, "FD identity");
    const auto p = random_probs(rng, 6);
    o.require(std::abs(eval::kl_divergence({{p, p}})) <= 1e-9, "KL identity");
    const auto w = fixtures::noise(0.25, 0.5, 12);
    o.require(std::abs(edit::audio_gen_mse(w, w)) <= 1e-9, "MSE identity");
    o.require(std::abs(edit::audio_remove_loss(w, w)) <= 1e-9, "remove loss identity");
    o.require(std::abs(cot::cot_total_score(fixtures::kGoldDoc, gold).total) <= 1e-9, "CoT identity");
  }
  int negatives = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = eval::gaussian_stats(random_set(rng, 6, 3));
    const auto b = eval::gaussian_stats(random_set(rng, 6, 3));
    negatives += eval::frechet_distance(a, b) < 0.0;
    negatives += eval::kl_divergence({{random_probs(rng, 5), random_probs(rng, 5)}}) < 0.0;
    const auto wa = fixtures::noise(0.128, 0.5, static_cast<unsigned>(2 * i + 100));
    const auto wb = fixtures::noise(0.128, 0.5, static_cast<unsigned>(2 * i + 101));
    negatives += edit::audio_gen_mse(wa, wb) < 0.0;
    negatives += edit::audio_remove_loss(wa, wb) < 0.0;
    negatives += cot::cot_total_score(cot::render_cot_detail(fixtures::random_cot(rng)),
                                      fixtures::random_cot(rng)).total < 0.0;
  }
  o.require(negatives == 0, std::to_string(negatives) + " negative values");
  if (o.pass) o.detail = "5 metrics zero on identity, 5000 random evaluations non-negative";
  return o;
}

Outcome removal_efficacy() {
  Outcome o;
  auto w = fixtures::sine(5000.0, 2.0, 0.3);
  fixtures::mix_into(w, fixtures::sine(1000.0, 1.0, 0.3));
  const std::vector<detect::TimeSpan> voiced = {{0.0, 1.0}};
  const auto once = edit::remove_voice(w, voiced).audio;
  auto band = [](const audio::Waveform& x, double t0, double t1) {
    const auto i0 = x.index_at(t0), i1 = x.index_at(t1);
    audio::Waveform part({x.data().begin() + static_cast<std::ptrdiff_t>(i0),
                          x.data().begin() + static_cast<std::ptrdiff_t>(i1)},
                         x.sample_rate());
    return audio::band_energy(audio::stft(part), {900.0, 1100.0});
  };
  const double cut = 10.0 * std::log10(band(w, 0.0, 1.0) / band(once, 0.0, 1.0));
  o.require(cut >= 20.0, "in-band attenuation " + fmt("%.2f dB", cut));
  const auto before = audio::rms_segments(w, 1.0);
  const auto after = audio::rms_segments(once, 1.0);
  const double shift = std::abs(20.0 * std::log10(after[1].rms / before[1].rms));
  o.require(shift <= 1.0, "out-of-segment shift " + fmt("%.3f dB", shift));
  const auto twice = edit::remove_voice(once, voiced).audio;
  const double regrowth = 10.0 * std::log10(band(twice, 0.0, 1.0) / band(once, 0.0, 1.0));
  const double second_shift =
      std::abs(20.0 * std::log10(audio::rms_segments(twice, 1.0)[1].rms / after[1].rms));
  o.require(regrowth <= 1.0 && second_shift <= 1.0,
            "second pass " + fmt("%.2f dB", regrowth) + " / " + fmt("%.3f dB", second_shift));
  if (o.pass) {
    o.detail = "attenuation " + fmt("%.1f dB", cut) + ", outside shift " + fmt("%.3f dB", shift) +
               ", second pass outside shift " + fmt("%.3f dB", second_shift);
  }
  return o;
}

detect::VideoDescriptor voiceover_video() {
  detect::VideoDescriptor v;
  v.id = "acc_vo";
  v.duration = 4.0;
  v.scene_tags = {"workshop"};
  v.onset_times = {0.2, 2.3};
  return v;
}

Outcome pipeline_gating() {
  Outcome o;
  const pipeline::StubBackend stub;
  std::size_t identical = 0, total = 0;
  for (auto s : pipeline::kAllStrategies) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      pipeline::PipelineConfig c;
      c.strategy = s;
      c.seed = seed;
      const auto a = pipeline::run_pipeline(voiceover_video(), "speech, voice", c, stub);
      const auto b = pipeline::run_pipeline(voiceover_video(), "speech, voice", c, stub);
      ++total;
      identical += a.final_audio == b.final_audio &&
                   pipeline::manifest_to_json(a.manifest, false) == pipeline::manifest_to_json(b.manifest, false);
    }
  }
  o.require(identical == total, "determinism " + std::to_string(identical) + "/" + std::to_string(total));

  int gated = 0;
  for (auto label : {VerdictLabel::no1, VerdictLabel::no2, VerdictLabel::no3}) {
    const auto item = dataset::synthesize_item("gate", label, 5);
    pipeline::PipelineConfig c;
    c.strategy = pipeline::Strategy::s3;
    const auto r = pipeline::run_pipeline(item.video, "", c, FixedBackend(item.audio));
    gated += r.manifest.verdict && r.manifest.verdict->label == label && r.final_audio == r.coarse;
  }
  o.require(gated == 3, "No* gating " + std::to_string(gated) + "/3");

  pipeline::PipelineConfig rm;
  rm.strategy = pipeline::Strategy::s4_rm;
  const auto r = pipeline::run_pipeline(voiceover_video(), "speech, voice", rm, stub);
  const std::size_t bars = r.manifest.silent_bars.size();
  o.require(bars > 0 && r.final_audio.size() == r.coarse.size() - bars * 16000,
            "s4_rm length " + std::to_string(r.final_audio.size()));

  pipeline::PipelineConfig rep;
  rep.strategy = pipeline::Strategy::s4_rep;
  const auto p = pipeline::run_pipeline(voiceover_video(), "speech, voice", rep, stub);
  bool exact = !p.manifest.silent_bars.empty();
  for (std::size_t i = 0; i < p.final_audio.size(); ++i) {
    const std::size_t b = i / 16000;
    const bool silent = std::find(p.manifest.silent_bars.begin(), p.manifest.silent_bars.end(), b) !=
                        p.manifest.silent_bars.end();
    exact = exact && p.final_audio.data()[i] == (silent ? p.coarse.data()[i] : p.edited.data()[i]);
  }
  o.require(exact, "s4_rep splice not samplewise exact");
  if (o.pass) {
    o.detail = std::to_string(total) + " repeat pairs identical, No* 3/3 gated, s4_rm -" +
               std::to_string(bars) + " bars exact, s4_rep splice exact";
  }
  return o;
}

Outcome qa_vs_cot(const fs::path& scratch) {
  Outcome o;
  dataset::build_corpus(100, dataset::kUniformMix, 21, scratch / "borderline", {10, dataset::kDefaultItemDuration});
  const auto rep = eval::evaluate_qa_cot(scratch / "borderline" / "manifest.json");
  const auto row = eval::format_qa_cot_row("stub", rep);
  o.require(rep.cot_num == rep.qa_num + 10,
            "cot_num " + std::to_string(rep.cot_num) + " vs qa_num " + std::to_string(rep.qa_num));
  o.require(std::count(row.begin(), row.end(), ',') == 5 && row.find('%') != std::string::npos,
            "row shape '" + row + "'");
  o.require(rep.cot_ratio > rep.qa_ratio,
            "cot_ratio " + fmt("%.4f", rep.cot_ratio) + " <= qa_ratio " + fmt("%.4f", rep.qa_ratio));
  if (o.pass) o.detail = "row '" + row + "'";
  return o;
}

Outcome report_arithmetic() {
  Outcome o;
  const double a = eval::improvement_pct(60.60, 55.19, eval::Direction::lower_better);
  const double b = eval::improvement_pct(1.66, 1.02, eval::Direction::lower_better);
  o.require(std::abs(a - 8.93) <= 0.01, "60.60->55.19 gives " + fmt("%.4f", a));
  o.require(std::abs(b - 38.55) <= 0.01 && std::abs(b - 38.61) <= 0.1, "1.66->1.02 gives " + fmt("%.4f", b));
  eval::MetricReport r;
  r.embedders = {"toy_f1024"};
  r.classifiers = {"band8"};
  r.rows.push_back({"Direct", {60.60}, {1.0}, 2.0, 0.2, 0.5});
  r.rows.push_back({"Ours", {55.19}, {1.0}, 2.0, 0.2, 0.5});
  o.require(eval::render_report_table(r).find("55.19 (8.93%)") != std::string::npos, "table cell");
  if (o.pass) o.detail = fmt("%.2f%%", a) + " and " + fmt("%.2f%%", b);
  return o;
}

Outcome grammar_suite() {
  Outcome o;
  std::mt19937 rng(500);
  int ok = 0;
  for (int i = 0; i < 500; ++i) {
    const auto d = fixtures::random_cot(rng);
    const auto text = cot::render_cot_detail(d);
    try {
      ok += cot::render_cot_detail(cot::parse_cot_detail(text)) == text;
    } catch (const cot::ParseError&) {
    }
  }
  o.require(ok == 500, "round-trip " + std::to_string(ok) + "/500");
  int named = 0;
  const auto cases = fixtures::malformed_cases();
  for (const auto& c : cases) {
    try {
      cot::parse_cot_detail(c.text);
    } catch (const cot::ParseError& e) {
      if (e.parse_kind() == c.kind && e.tag() == c.tag) {
        ++named;
        continue;
      }
    }
    o.require(false, "fixture '" + c.name + "'");
  }
  o.require(cases.size() == 12, "fixture count");
  if (o.pass) o.detail = "500/500 round-trips, " + std::to_string(named) + "/12 named errors";
  return o;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

Outcome closed_loop(const fs::path& scratch) {
  Outcome o;
  const auto root = scratch / "closed_loop";
  const auto m = dataset::build_corpus(dataset::kDefaultCorpusSize, dataset::kUniformMix, 42, root);
  int recovered = 0;
  for (const auto& it : m.items) {
    const auto video = detect::read_descriptor(m.resolve(it.descriptor));
    const auto audio = audio::read_wav(m.resolve(it.audio));
    recovered += detect::judge(video, audio, detect::Mode::cot).label == it.gold_label &&
                 detect::judge(video, audio, detect::Mode::qa).label == it.gold_label;
  }
  o.require(recovered == 180, "judge recovered " + std::to_string(recovered) + "/180");
  const auto manifest = root / "manifest.json";
  o.require(dataset::validate_manifest(manifest).empty(), "fresh corpus has violations");

  const std::string pristine = read_all(manifest);
  auto caught = [&](dataset::ViolationKind kind, bool exactly_one) {
    const auto v = dataset::validate_manifest(manifest);
    const auto hits = std::count_if(v.begin(), v.end(), [kind](const auto& x) { return x.kind == kind; });
    return exactly_one ? v.size() == 1 && hits == 1 : hits >= 1;
  };
  int faults = 0;
  const auto& item = m.items[7];
  {
    auto j = nlohmann::json::parse(pristine);
    j["items"][7]["gold_label"] = item.gold_label == VerdictLabel::yes ? "No1" : "Yes";
    write_all(manifest, j.dump(2));
    faults += caught(dataset::ViolationKind::label_mismatch, true);
    write_all(manifest, pristine);
  }
  {
    const auto wav = m.resolve(item.audio);
    fs::rename(wav, wav.string() + ".bak");
    faults += caught(dataset::ViolationKind::missing_file, true);
    fs::rename(wav.string() + ".bak", wav);
  }
  {
    const auto cot_path = m.resolve(item.cot);
    const auto text = read_all(cot_path);
    write_all(cot_path, fixtures::replace_once(text, "</CAPTION>", ""));
    faults += caught(dataset::ViolationKind::bad_cot, true);
    write_all(cot_path, text);
  }
  {
    const auto desc = m.resolve(item.descriptor);
    const auto text = read_all(desc);
    write_all(desc, "{");
    faults += caught(dataset::ViolationKind::bad_descriptor, true);
    write_all(desc, text);
  }
  {
    auto j = nlohmann::json::parse(pristine);
    j["items"][8]["id"] = j["items"][7]["id"];
    write_all(manifest, j.dump(2));
    faults += caught(dataset::ViolationKind::duplicate_id, false);
    write_all(manifest, pristine);
  }
  {
    auto j = nlohmann::json::parse(pristine);
    j["counts"]["No1"] = j["counts"]["No1"].get<int>() + 1;
    write_all(manifest, j.dump(2));
    faults += caught(dataset::ViolationKind::count_mismatch, true);
    write_all(manifest, pristine);
  }
  o.require(faults == 6, "fault injections caught " + std::to_string(faults) + "/6");
  o.require(dataset::validate_manifest(manifest).empty(), "restored corpus not clean");
  if (o.pass) o.detail = "180/180 recovered, 0 violations, 6/6 injected faults caught";
  return o;
}

Outcome http_mock() {
  Outcome o;
  const auto sine = fixtures::sine(440.0, 1.0, 0.5);
  fixtures::MockServer mock;
  mock.server().Post("/v2a", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(pipeline::encode_v2a_response(sine), "application/json");
  });
  mock.start();
  const auto w = pipeline::http_v2a_client(mock.url(), {voiceover_video(), "", std::nullopt, 0}, 10.0);
  double err = w.size() == sine.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(w.size(), sine.size()); ++i) {
    err = std::max(err, double(std::abs(w.data()[i] - sine.data()[i])));
  }
  o.require(err <= 1e-6, "mock round-trip error " + fmt("%.3g", err));
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  fixtures::TempDir scratch("acceptance");

  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "taxonomy exactness", taxonomy},
      {2, "metric oracles", metric_oracles},
      {3, "identity suite", identity_suite},
      {4, "removal efficacy", removal_efficacy},
      {5, "pipeline determinism and gating", pipeline_gating},
      {6, "QA-vs-CoT ordering", [&] { return qa_vs_cot(scratch.path()); }},
      {7, "report arithmetic", report_arithmetic},
      {8, "grammar suite", grammar_suite},
      {9, "closed-loop corpus", [&] { return closed_loop(scratch.path()); }},
  };

  int failures = 0;
  Outcome http;
  auto report = [&](int id, const std::string& name, const Outcome& o, double secs) {
    std::printf("%s  %2d  %-34s [%6.2f s]  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  for (const auto& c : criteria) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    report(c.id, c.name, o, std::chrono::duration<double>(clock::now() - t0).count());
  }

  const auto t0 = clock::now();
  try {
    http = http_mock();
  } catch (const std::exception& e) {
    http.pass = false;
    http.detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
  Outcome runtime = http;
  runtime.require(elapsed < 180.0, "suite took " + fmt("%.1f s", elapsed));
  if (runtime.pass) runtime.detail = "suite " + fmt("%.1f s", elapsed) + " < 180 s, HTTP client verified on loopback mock";
  report(10, "runtime and offline operation", runtime, std::chrono::duration<double>(clock::now() - t0).count());

  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
