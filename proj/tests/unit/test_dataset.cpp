#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "deepsound/dataset.hpp"
#include "fixtures.hpp"

using namespace deepsound;
using namespace deepsound::dataset;

namespace {

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_SUITE("allocate_labels") {
  TEST_CASE("balanced 40") {
    CHECK(allocate_labels(40, kUniformMix) == LabelCounts{10, 10, 10, 10});
  }

  TEST_CASE("largest remainder with ties to the earlier label") {
    CHECK(allocate_labels(10, kUniformMix) == LabelCounts{3, 3, 2, 2});
    CHECK(allocate_labels(7, {0.5, 0.3, 0.2, 0.0}) == LabelCounts{4, 2, 1, 0});
  }

  TEST_CASE("invalid mixes") {
    CHECK_THROWS_AS(allocate_labels(10, {0.5, 0.5, 0.5, 0.0}), Error);
    CHECK_THROWS_AS(allocate_labels(10, {1.2, -0.2, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(parse_mix("0.5,0.5"), Error);
    CHECK(parse_mix("0.4,0.2,0.2,0.2") == LabelMix{0.4, 0.2, 0.2, 0.2});
  }
}

TEST_SUITE("synthesis") {
  TEST_CASE("every label is recovered by the detector") {
    for (auto label : kAllLabels) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto item = synthesize_item("it", label, seed);
        CAPTURE(to_string(label));
        CAPTURE(seed);
        CHECK(item.gold.conclusion_label == label);
        CHECK(detect::judge(item.video, item.audio, detect::Mode::cot).label == label);
        CHECK(detect::judge(item.video, item.audio, detect::Mode::qa).label == label);
      }
    }
  }

  TEST_CASE("borderline item") {
    const auto item = synthesize_borderline_item("edge", 4);
    CHECK(item.gold.conclusion_label == VerdictLabel::yes);
    CHECK(item.video.person_segments.empty());
    const auto qa = detect::judge(item.video, item.audio, detect::Mode::qa);
    const auto cot = detect::judge(item.video, item.audio, detect::Mode::cot);
    CHECK(qa.label == VerdictLabel::no1);
    CHECK(cot.label == VerdictLabel::yes);
  }
}

TEST_SUITE("corpus") {
  TEST_CASE("build, validate and count") {
    fixtures::TempDir tmp("corpus");
    const auto m = build_corpus(40, kUniformMix, 7, tmp.path());
    CHECK(m.items.size() == 40);
    CHECK(m.counts == LabelCounts{10, 10, 10, 10});
    CHECK(validate_manifest(tmp / "manifest.json").empty());
    const auto stats = label_stats(read_manifest(tmp / "manifest.json"));
    CHECK(stats.counts == LabelCounts{10, 10, 10, 10});
    double sum = 0.0;
    for (double p : stats.proportions) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    for (const auto& it : m.items) {
      CHECK(std::filesystem::exists(m.resolve(it.descriptor)));
      CHECK(std::filesystem::exists(m.resolve(it.audio)));
      CHECK(std::filesystem::exists(m.resolve(it.cot)));
    }
  }

  TEST_CASE("byte-identical across runs") {
    fixtures::TempDir a("corpus_a"), b("corpus_b");
    build_corpus(16, kUniformMix, 5, a.path());
    build_corpus(16, kUniformMix, 5, b.path());
    CHECK(read_all(a / "manifest.json") == read_all(b / "manifest.json"));
    CHECK(read_all(a / "item_0003/audio.wav") == read_all(b / "item_0003/audio.wav"));
  }

  TEST_CASE("manifest round-trips through JSON") {
    fixtures::TempDir tmp("corpus_rt");
    const auto m = build_corpus(8, kUniformMix, 1, tmp.path(), {2, kDefaultItemDuration});
    CHECK(parse_manifest(manifest_to_json(m)) == m);
    CHECK(read_manifest(tmp / "manifest.json") == m);
  }

  TEST_CASE("flipped gold label is one label violation") {
    fixtures::TempDir tmp("corpus_flip");
    build_corpus(12, kUniformMix, 2, tmp.path());
    auto j = nlohmann::json::parse(read_all(tmp / "manifest.json"));
    auto& item = j["items"][3];
    item["gold_label"] = item["gold_label"] == "Yes" ? "No1" : "Yes";
    write_all(tmp / "manifest.json", j.dump(2));
    const auto v = validate_manifest(tmp / "manifest.json");
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::label_mismatch);
    CHECK(v[0].id == item["id"].get<std::string>());
  }

  TEST_CASE("missing audio file names the id") {
    fixtures::TempDir tmp("corpus_missing");
    const auto m = build_corpus(8, kUniformMix, 2, tmp.path());
    std::filesystem::remove(m.resolve(m.items[4].audio));
    const auto v = validate_manifest(tmp / "manifest.json");
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::missing_file);
    CHECK(v[0].id == m.items[4].id);
  }

  TEST_CASE("duplicate ids, broken CoT and count mismatch") {
    fixtures::TempDir tmp("corpus_faults");
    const auto m = build_corpus(8, kUniformMix, 2, tmp.path());
    write_all(m.resolve(m.items[0].cot), "<SUMMARY>\nbroken");
    auto j = nlohmann::json::parse(read_all(tmp / "manifest.json"));
    j["items"][2]["id"] = j["items"][1]["id"];
    j["counts"]["Yes"] = j["counts"]["Yes"].get<int>() + 1;
    write_all(tmp / "manifest.json", j.dump(2));
    const auto v = validate_manifest(tmp / "manifest.json");
    auto has = [&](ViolationKind k) {
      return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
    };
    CHECK(has(ViolationKind::bad_cot));
    CHECK(has(ViolationKind::duplicate_id));
    CHECK(has(ViolationKind::count_mismatch));
  }

  TEST_CASE("empty manifest stats") {
    const auto s = label_stats(CorpusManifest{});
    CHECK(s.counts == LabelCounts{0, 0, 0, 0});
    CHECK(s.total == 0);
  }

  TEST_CASE("unreadable manifest is an io error") {
    try {
      validate_manifest("/nonexistent/manifest.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
    }
  }

  TEST_CASE("argument checks") {
    fixtures::TempDir tmp("corpus_args");
    CHECK_THROWS_AS(build_corpus(3, kUniformMix, 1, tmp.path()), Error);
    CHECK_THROWS_AS(build_corpus(10, {0.9, 0.9, 0.0, 0.0}, 1, tmp.path()), Error);
  }
}
