#include <doctest.h>

#include <cmath>
#include <functional>
#include <fstream>
#include <random>

#include "deepsound/dataset.hpp"
#include "deepsound/eval.hpp"
#include "deepsound/pipeline.hpp"
#include "fixtures.hpp"

using namespace deepsound;
using namespace deepsound::eval;

namespace {

GaussianStats gauss1d(double mean, double var) {
  GaussianStats g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.cov = Eigen::MatrixXd::Constant(1, 1, var);
  g.n = 100;
  return g;
}

Vector random_probs(std::mt19937& rng, std::size_t c) {
  std::gamma_distribution<double> g(0.3, 1.0);
  Vector p(c);
  double sum = 0.0;
  for (auto& x : p) sum += (x = g(rng) + 1e-12);
  for (auto& x : p) x /= sum;
  return p;
}

detect::VideoDescriptor onset_video(std::vector<double> onsets) {
  detect::VideoDescriptor v;
  v.id = "sync";
  v.duration = 5.0;
  v.onset_times = std::move(onsets);
  return v;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("gaussian_stats") {
  TEST_CASE("constant set has zero covariance") {
    const EmbeddingSet e{{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}}, "c"};
    const auto g = gaussian_stats(e);
    CHECK(g.mean(1) == doctest::Approx(2.0));
    CHECK(g.cov.norm() == doctest::Approx(0.0));
  }

  TEST_CASE("unbiased 1-D covariance") {
    const auto g = gaussian_stats({{{0.0}, {2.0}}, "x"});
    CHECK(g.mean(0) == doctest::Approx(1.0));
    CHECK(g.cov(0, 0) == doctest::Approx(2.0));
  }

  TEST_CASE("duplicated set keeps the mean") {
    const EmbeddingSet a{{{0.0, 1.0}, {2.0, 5.0}, {1.0, -1.0}}, "a"};
    EmbeddingSet b = a;
    b.vectors.insert(b.vectors.end(), a.vectors.begin(), a.vectors.end());
    CHECK((gaussian_stats(a).mean - gaussian_stats(b).mean).norm() < 1e-12);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(gaussian_stats({{{1.0}}, "one"}), Error);
    CHECK_THROWS_AS(gaussian_stats({{{1.0}, {1.0, 2.0}}, "ragged"}), Error);
    CHECK_THROWS_AS(gaussian_stats({{{1.0}, {NAN}}, "nan"}), Error);
  }
}

TEST_SUITE("frechet") {
  TEST_CASE("identical stats") {
    const auto g = gaussian_stats({{{0.0, 1.0}, {2.0, 5.0}, {1.0, -1.0}}, "a"});
    CHECK(std::abs(frechet_distance(g, g)) < 1e-9);
  }

  TEST_CASE("1-D closed forms") {
    CHECK(frechet_distance(gauss1d(0, 1), gauss1d(1, 1)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(frechet_distance(gauss1d(0, 1), gauss1d(0, 4)) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("diagonal closed form") {
    GaussianStats a, b;
    a.mean = Eigen::Vector2d(0, 0);
    b.mean = Eigen::Vector2d(1, 2);
    a.cov = Eigen::Vector2d(1, 9).asDiagonal();
    b.cov = Eigen::Vector2d(4, 1).asDiagonal();
    // |dmu|^2 + sum (sqrt(a) - sqrt(b))^2 = 5 + 1 + 4
    CHECK(frechet_distance(a, b) == doctest::Approx(10.0).epsilon(1e-9));
  }

  TEST_CASE("dimension mismatch") {
    GaussianStats a = gauss1d(0, 1);
    GaussianStats b;
    b.mean = Eigen::Vector2d(0, 0);
    b.cov = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(frechet_distance(a, b), Error);
  }
}

TEST_SUITE("kl") {
  TEST_CASE("fixture") {
    CHECK(kl_divergence({{{0.5, 0.5}, {0.25, 0.75}}}) == doctest::Approx(0.1438).epsilon(1e-3));
  }

  TEST_CASE("identical distributions") {
    CHECK(kl_divergence({{{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}}}) == 0.0);
  }

  TEST_CASE("Gibbs inequality on random pairs") {
    std::mt19937 rng(1);
    for (int i = 0; i < 200; ++i) {
      REQUIRE(kl_divergence({{random_probs(rng, 6), random_probs(rng, 6)}}) >= 0.0);
    }
  }

  TEST_CASE("non-normalized input") {
    CHECK_THROWS_AS(kl_divergence({{{0.5, 0.6}, {0.5, 0.5}}}), Error);
    CHECK_THROWS_AS(kl_divergence({}), Error);
  }
}

TEST_SUITE("inception_score") {
  TEST_CASE("uniform rows") {
    CHECK(inception_score({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}}) == doctest::Approx(1.0));
  }

  TEST_CASE("one-hot rows spread evenly reach C") {
    std::vector<Vector> rows;
    for (int i = 0; i < 12; ++i) {
      Vector p(4, 0.0);
      p[static_cast<std::size_t>(i % 4)] = 1.0;
      rows.push_back(p);
    }
    CHECK(inception_score(rows) == doctest::Approx(4.0).epsilon(1e-9));
  }

  TEST_CASE("identical rows") {
    CHECK(inception_score({{0.1, 0.9}, {0.1, 0.9}, {0.1, 0.9}}) == doctest::Approx(1.0));
  }

  TEST_CASE("bounds over random inputs") {
    std::mt19937 rng(2);
    for (int i = 0; i < 100; ++i) {
      std::vector<Vector> rows;
      for (int j = 0; j < 8; ++j) rows.push_back(random_probs(rng, 5));
      const double is = inception_score(rows);
      REQUIRE(is >= 1.0);
      REQUIRE(is <= 5.0);
    }
  }
}

TEST_SUITE("ib_score") {
  TEST_CASE("identical, opposite and orthogonal pairs") {
    const EmbeddingSet v{{{1.0, 2.0}, {0.0, 3.0}}, "v"};
    const EmbeddingSet neg{{{-1.0, -2.0}, {0.0, -3.0}}, "a"};
    const EmbeddingSet orth{{{-2.0, 1.0}, {3.0, 0.0}}, "a"};
    CHECK(ib_score(v, v) == doctest::Approx(1.0));
    CHECK(ib_score(v, neg) == doctest::Approx(-1.0));
    CHECK(std::abs(ib_score(v, orth)) < 1e-9);
  }

  TEST_CASE("count mismatch") {
    CHECK_THROWS_AS(ib_score({{{1.0}}, "v"}, {{{1.0}, {2.0}}, "a"}), Error);
  }
}

TEST_SUITE("desync") {
  TEST_CASE("bursts on the onsets") {
    const auto v = onset_video({0.5, 1.7, 3.2});
    const auto w = pipeline::stub_v2a(v, "", std::nullopt, 1);
    CHECK(desync_proxy(w, v.onset_times) <= 0.05);
  }

  TEST_CASE("bursts shifted by 0.3 s") {
    const std::vector<double> onsets = {0.5, 1.7, 3.2};
    const auto shifted = onset_video({0.8, 2.0, 3.5});
    const auto w = pipeline::stub_v2a(shifted, "", std::nullopt, 1);
    CHECK(desync_proxy(w, onsets) == doctest::Approx(0.3).epsilon(0.05 / 0.3));
  }

  TEST_CASE("silent audio hits the cap") {
    CHECK(desync_proxy(audio::Waveform::zeros(16000), {0.5}) == kDesyncCap);
  }

  TEST_CASE("onset detector finds each burst once") {
    const auto v = onset_video({0.5, 1.7, 3.2});
    const auto onsets = detect_audio_onsets(pipeline::stub_v2a(v, "", std::nullopt, 1));
    REQUIRE(onsets.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(onsets[i] - v.onset_times[i]) <= 0.03);
  }

  TEST_CASE("onset histogram") {
    const auto h = onset_histogram({0.1, 0.2, 4.9}, 5.0, 5);
    CHECK(h[0] == doctest::Approx(2.0 / 3.0));
    CHECK(h[4] == doctest::Approx(1.0 / 3.0));
    CHECK(onset_histogram({}, 5.0, 4) == Vector(4, 0.0));
  }
}

TEST_SUITE("embedders") {
  TEST_CASE("zero energy is rejected") {
    CHECK_THROWS_AS(toy_embedder(audio::Waveform::zeros(4096)), Error);
  }

  TEST_CASE("gain shifts only the level coordinates by ln|c|") {
    const auto w = fixtures::noise(1.0, 0.2, 3);
    auto scaled = w;
    for (auto& x : scaled.data()) x *= -3.0f;
    const auto a = toy_embedder(w);
    const auto b = toy_embedder(scaled);
    REQUIRE(a.size() == kToyDim);
    const double shift = std::log(3.0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(b[i] - a[i] == doctest::Approx(shift).epsilon(1e-5));
    for (std::size_t i = 8; i < 12; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-5));
    CHECK(b[12] - a[12] == doctest::Approx(shift).epsilon(1e-5));
    for (std::size_t i = 13; i < kToyDim; ++i) CHECK(a[i] == 0.0);
  }

  TEST_CASE("identical input gives identical embeddings") {
    const auto w = fixtures::noise(0.5, 0.3, 4);
    for (const auto& e : default_embedders()) CHECK(e->embed(w) == e->embed(w));
  }

  TEST_CASE("classifiers are gain invariant distributions") {
    const auto w = fixtures::noise(0.5, 0.3, 5);
    auto louder = w;
    for (auto& x : louder.data()) x *= 4.0f;
    for (const auto& c : default_classifiers()) {
      const auto p = c->probabilities(w);
      const auto q = c->probabilities(louder);
      REQUIRE(p.size() == c->classes());
      double sum = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        sum += p[i];
        CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-6));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("short input is padded to one frame") {
    CHECK(toy_embedder(fixtures::noise(0.01, 0.3, 6)).size() == kToyDim);
  }
}

TEST_SUITE("report") {
  TEST_CASE("improvement percentages") {
    CHECK(improvement_pct(60.60, 55.19, Direction::lower_better) == doctest::Approx(8.93).epsilon(0.01 / 8.93));
    CHECK(std::abs(improvement_pct(1.66, 1.02, Direction::lower_better) - 38.61) <= 0.1);
    CHECK(improvement_pct(2.0, 2.0, Direction::lower_better) == 0.0);
    CHECK(improvement_pct(2.0, 3.0, Direction::higher_better) == doctest::Approx(50.0));
    CHECK(std::isnan(improvement_pct(0.0, 1.0, Direction::lower_better)));
  }

  MetricReport sample_report() {
    MetricReport r;
    r.embedders = {"toy_f1024"};
    r.classifiers = {"band8"};
    r.rows.push_back({"Direct", {60.60}, {1.5}, 2.0, 0.3, 0.4});
    r.rows.push_back({"Ours-s4-rep", {55.19}, {1.2}, 2.5, 0.35, 0.3});
    return r;
  }

  TEST_CASE("table cells carry improvements against Direct") {
    const auto text = render_report_table(sample_report());
    CHECK(text.find("55.19 (8.93%)") != std::string::npos);
    CHECK(text.find("FD_toy_f1024") != std::string::npos);
  }

  TEST_CASE("json round-trip and emitted files") {
    const auto r = sample_report();
    const auto back = parse_report_json(report_to_json(r));
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[1].fd[0] == r.rows[1].fd[0]);
    CHECK(back.rows[1].desync == r.rows[1].desync);
    fixtures::TempDir tmp("report");
    emit_report(r, tmp.path());
    CHECK(std::filesystem::exists(tmp / "report.txt"));
    CHECK(std::filesystem::exists(tmp / "report.json"));
    const auto csv = read_all(tmp.path() / "plots" / "FD_toy_f1024.csv");
    CHECK(csv.rfind("method,value,improvement_pct\n", 0) == 0);
    CHECK(csv.find("Ours-s4-rep,55.190000,8.9274") != std::string::npos);
  }

  TEST_CASE("validation catches out-of-range cells") {
    auto r = sample_report();
    r.rows[0].is = 0.5;
    CHECK_THROWS_AS(r.validate(), Error);
    r = sample_report();
    r.rows[0].fd.push_back(1.0);
    CHECK_THROWS_AS(r.validate(), Error);
  }

  TEST_CASE("qa-cot row format") {
    const QaCotReport rep{0.4046, 0.5830, 1072, 1455, 1525};
    CHECK(format_qa_cot_row("MMAudio-S-44k", rep) == "MMAudio-S-44k, 40.46%, 58.30%, 1072, 1455, 1525");
  }

  TEST_CASE("voice-free items give an all-zero qa-cot report") {
    std::vector<JudgedItem> items;
    for (int i = 0; i < 3; ++i) items.push_back({onset_video({1.0}), fixtures::sine(5000.0, 5.0, 0.2)});
    const auto rep = qa_cot_report(items);
    CHECK(rep.qa_num == 0);
    CHECK(rep.cot_num == 0);
    CHECK(rep.total == 0);
    CHECK(rep.qa_ratio == 0.0);
    CHECK(rep.cot_ratio == 0.0);
  }
}

TEST_SUITE("evaluate_methods") {
  struct Corpus {
    fixtures::TempDir dir{"eval"};
    dataset::CorpusManifest manifest;
    Corpus() { manifest = dataset::build_corpus(12, dataset::kUniformMix, 3, dir.path() / "corpus"); }
    std::filesystem::path manifest_path() const { return dir.path() / "corpus" / "manifest.json"; }

    std::filesystem::path method(const std::string& name, const std::function<audio::Waveform(const dataset::CorpusItem&)>& make) const {
      const auto out = dir.path() / name;
      std::filesystem::create_directories(out);
      for (const auto& it : manifest.items) audio::write_wav(out / (it.id + ".wav"), make(it));
      return out;
    }
  };

  TEST_CASE("ground-truth copy scores zero FD and KL") {
    Corpus c;
    const auto gt = c.method("gt", [&](const dataset::CorpusItem& it) { return audio::read_wav(c.manifest.resolve(it.audio)); });
    const auto rep = evaluate_methods(c.manifest_path(), {gt}, {2});
    REQUIRE(rep.rows.size() == 1);
    for (double fd : rep.rows[0].fd) CHECK(std::abs(fd) <= 1e-6);
    for (double kl : rep.rows[0].kl) CHECK(kl == doctest::Approx(0.0));
  }

  TEST_CASE("distinct stub methods give finite non-negative cells") {
    Corpus c;
    const auto a = c.method("direct", [&](const dataset::CorpusItem& it) {
      return pipeline::stub_v2a(detect::read_descriptor(c.manifest.resolve(it.descriptor)), "", std::nullopt, 11);
    });
    const auto b = c.method("voiced", [&](const dataset::CorpusItem& it) {
      return pipeline::stub_v2a(detect::read_descriptor(c.manifest.resolve(it.descriptor)), "speech, voice", std::nullopt, 12);
    });
    const auto rep = evaluate_methods(c.manifest_path(), {a, b});
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
      for (const auto& col : report_columns(rep)) {
        const double v = column_value(row, col);
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
      }
    }
    // Threading must not change the numbers.
    const auto serial = evaluate_methods(c.manifest_path(), {a, b}, {1});
    CHECK(report_to_json(serial) == report_to_json(rep));
  }

  TEST_CASE("missing audio lists every missing id") {
    Corpus c;
    const auto m = c.method("partial", [&](const dataset::CorpusItem& it) { return audio::read_wav(c.manifest.resolve(it.audio)); });
    std::filesystem::remove(m / (c.manifest.items[2].id + ".wav"));
    std::filesystem::remove(m / (c.manifest.items[5].id + ".wav"));
    try {
      evaluate_methods(c.manifest_path(), {m});
      FAIL("expected missing audio");
    } catch (const MissingAudioError& e) {
      CHECK(e.ids() == std::vector<std::string>{c.manifest.items[2].id, c.manifest.items[5].id});
    }
  }
}
