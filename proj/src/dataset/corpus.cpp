#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>

#include <json.hpp>

#include "deepsound/dataset.hpp"
#include "deepsound/pipeline.hpp"
#include "util/file_io.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace deepsound::dataset {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 10> kScenePool = {
    "street", "kitchen", "forest", "beach",  "workshop",
    "stadium", "harbor", "office", "garden", "train station"};

constexpr std::string_view kVoicePrompt = "speech, voice";
constexpr double kBorderlineDbfs = -20.0;
constexpr double kBorderlineF0 = 125.0;
constexpr double kFade = 0.010;

std::vector<std::string> pick_scene_tags(util::Rng& rng) {
  const std::size_t count = 1 + rng.below(2);
  std::vector<std::string> tags;
  while (tags.size() < count) {
    const std::string tag(kScenePool[rng.below(kScenePool.size())]);
    if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
  }
  return tags;
}

// One onset in each of 2-4 distinct one-second bars.
std::vector<double> pick_onsets(util::Rng& rng, double duration) {
  const auto bars = static_cast<std::size_t>(std::floor(duration));
  if (bars == 0) return {};
  std::vector<std::size_t> order(bars);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = bars; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t count = std::min<std::size_t>(bars, 2 + rng.below(3));
  std::vector<double> onsets;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(order[i]) + rng.uniform(0.1, 0.6);
    onsets.push_back(std::round(t * 1000.0) / 1000.0);
  }
  std::sort(onsets.begin(), onsets.end());
  return onsets;
}

detect::TimeSpan pick_person_span(util::Rng& rng, double duration) {
  const double t0 = std::round(rng.uniform(0.0, 0.3 * duration) * 100.0) / 100.0;
  const double len = std::round(rng.uniform(0.4, 0.6) * duration * 100.0) / 100.0;
  return {t0, std::min(duration, t0 + len)};
}

std::string item_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%04zu", index);
  return buf;
}

}  // namespace

LabelCounts allocate_labels(std::size_t n, const LabelMix& mix) {
  double sum = 0.0;
  for (double p : mix) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::argument, "label proportions must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw Error(ErrorKind::argument, "label proportions must sum to 1");

  LabelCounts counts{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = static_cast<double>(n) * mix[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 4]];
  return counts;
}

SynthItem synthesize_item(const std::string& id, VerdictLabel label, std::uint64_t seed,
                          double duration) {
  util::Rng rng(util::mix_seed(seed ^ 0x5EEDull, util::fnv1a(id)));
  SynthItem item;
  auto& v = item.video;
  v.id = id;
  v.duration = duration;
  v.scene_tags = pick_scene_tags(rng);
  v.onset_times = pick_onsets(rng, duration);
  const bool person = label == VerdictLabel::no2 || label == VerdictLabel::no3;
  if (person) v.person_segments.push_back(pick_person_span(rng, duration));

  std::string prompt(pipeline::kDefaultInstruction);
  std::optional<std::string> negative;
  if (label == VerdictLabel::yes) prompt = kVoicePrompt;
  if (label == VerdictLabel::no3) negative = std::string(pipeline::kDefaultNegativePrompt);

  item.audio = pipeline::stub_v2a(v, prompt, negative, seed);
  const bool voice = label == VerdictLabel::yes || label == VerdictLabel::no2;
  item.gold = detect::build_verdict_cot(person, voice, v.scene_tags);
  return item;
}

SynthItem synthesize_borderline_item(const std::string& id, std::uint64_t seed, double duration) {
  util::Rng rng(util::mix_seed(seed ^ 0xB0DEull, util::fnv1a(id)));
  SynthItem item;
  auto& v = item.video;
  v.id = id;
  v.duration = duration;
  v.scene_tags = pick_scene_tags(rng);
  item.audio = pipeline::stub_v2a(v, pipeline::kDefaultInstruction, std::nullopt, seed);

  // Fundamental below the voice band carrying 1 - ratio of the power, four
  // in-band harmonics sharing the rest. Periodic at 125 Hz, so harmonicity
  // stays high while the band ratio sits between the two detector profiles.
  const double power = std::pow(10.0, kBorderlineDbfs / 10.0);
  const double a0 = std::sqrt(2.0 * power * (1.0 - kBorderlineBandRatio));
  const double ak = std::sqrt(2.0 * power * kBorderlineBandRatio / 4.0);
  const int sr = item.audio.sample_rate();
  const auto frames = static_cast<std::size_t>(std::floor((duration - kBorderlineSeconds) / detect::kFrameSeconds));
  const std::size_t frame = 1 + rng.below(std::max<std::size_t>(1, frames - 1));
  const double t_start = static_cast<double>(frame) * detect::kFrameSeconds;
  const auto i0 = static_cast<std::size_t>(std::llround(t_start * sr));
  const auto len = static_cast<std::size_t>(std::llround(kBorderlineSeconds * sr));

  auto& s = item.audio.data();
  for (std::size_t i = 0; i < len && i0 + i < s.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double edge = std::min(t, kBorderlineSeconds - t);
    const double fade = edge < kFade ? 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kFade) : 1.0;
    double x = a0 * std::sin(2.0 * std::numbers::pi * kBorderlineF0 * t);
    for (int k = 2; k <= 8; k += 2) x += ak * std::sin(2.0 * std::numbers::pi * kBorderlineF0 * k * t);
    s[i0 + i] = static_cast<float>(std::clamp(s[i0 + i] + fade * x, -1.0, 1.0));
  }
  item.gold = detect::build_verdict_cot(false, true, v.scene_tags);
  return item;
}

CorpusManifest build_corpus(std::size_t n, const LabelMix& mix, std::uint64_t seed,
                            const std::filesystem::path& out_dir, const CorpusOptions& options) {
  if (n < 4) throw Error(ErrorKind::argument, "corpus needs at least 4 items");
  if (options.borderline > n) throw Error(ErrorKind::argument, "more borderline items than items");
  if (!(options.duration >= 1.0)) throw Error(ErrorKind::argument, "item duration must be >= 1 s");
  const auto counts = allocate_labels(n - options.borderline, mix);

  // Slot value 4 marks a borderline item.
  std::vector<std::size_t> slots;
  for (std::size_t l = 0; l < 4; ++l) slots.insert(slots.end(), counts[l], l);
  slots.insert(slots.end(), options.borderline, 4);
  util::Rng rng(util::mix_seed(seed, util::fnv1a("corpus-order")));
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);

  CorpusManifest m;
  m.seed = seed;
  m.root = out_dir;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto id = item_id(i);
    const bool borderline = slots[i] == 4;
    const auto label = borderline ? VerdictLabel::yes : kAllLabels[slots[i]];
    const auto item = borderline ? synthesize_borderline_item(id, seed, options.duration)
                                 : synthesize_item(id, label, seed, options.duration);

    CorpusItem entry{id, std::filesystem::path(id) / "descriptor.json",
                     std::filesystem::path(id) / "audio.wav", std::filesystem::path(id) / "cot.txt",
                     label, borderline};
    util::write_text_file(m.resolve(entry.descriptor), detect::descriptor_to_json(item.video));
    audio::write_wav(m.resolve(entry.audio), item.audio);
    util::write_text_file(m.resolve(entry.cot), cot::render_cot_detail(item.gold));
    ++m.counts[label_index(label)];
    m.items.push_back(std::move(entry));
  }
  write_manifest(out_dir / "manifest.json", m);
  return m;
}

LabelMix parse_mix(std::string_view text) {
  LabelMix mix{};
  std::size_t i = 0;
  while (true) {
    const auto comma = text.find(',');
    const auto part = util::trim(text.substr(0, comma));
    if (i >= 4) throw Error(ErrorKind::argument, "label mix needs exactly 4 proportions");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error(ErrorKind::argument, "invalid label proportion '" + std::string(part) + "'");
    }
    mix[i++] = value;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (i != 4) throw Error(ErrorKind::argument, "label mix needs exactly 4 proportions");
  return mix;
}

std::string manifest_to_json(const CorpusManifest& m) {
  json j;
  j["seed"] = m.seed;
  j["counts"] = json::object();
  for (auto label : kAllLabels) j["counts"][std::string(to_string(label))] = m.counts[label_index(label)];
  j["items"] = json::array();
  for (const auto& it : m.items) {
    j["items"].push_back({{"id", it.id},
                          {"descriptor", it.descriptor.generic_string()},
                          {"audio", it.audio.generic_string()},
                          {"cot", it.cot.generic_string()},
                          {"gold_label", std::string(to_string(it.gold_label))},
                          {"borderline", it.borderline}});
  }
  return j.dump(2) + "\n";
}

CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& root) {
  CorpusManifest m;
  m.root = root;
  try {
    const auto j = json::parse(text);
    m.seed = j.at("seed").get<std::uint64_t>();
    for (auto label : kAllLabels) {
      m.counts[label_index(label)] = j.at("counts").value(std::string(to_string(label)), std::size_t{0});
    }
    for (const auto& ji : j.at("items")) {
      CorpusItem it;
      it.id = ji.at("id").get<std::string>();
      it.descriptor = ji.at("descriptor").get<std::string>();
      it.audio = ji.at("audio").get<std::string>();
      it.cot = ji.at("cot").get<std::string>();
      const auto label = ji.at("gold_label").get<std::string>();
      const auto parsed = parse_label(label);
      if (!parsed) throw Error(ErrorKind::format, "unknown gold label '" + label + "'");
      it.gold_label = *parsed;
      it.borderline = ji.value("borderline", false);
      m.items.push_back(std::move(it));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("invalid corpus manifest: ") + e.what());
  }
  return m;
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(util::read_text_file(path), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  util::write_text_file(path, manifest_to_json(manifest));
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::missing_file: return "missing_file";
    case ViolationKind::bad_descriptor: return "bad_descriptor";
    case ViolationKind::bad_cot: return "bad_cot";
    case ViolationKind::label_mismatch: return "label_mismatch";
    case ViolationKind::duplicate_id: return "duplicate_id";
    case ViolationKind::count_mismatch: return "count_mismatch";
  }
  return "?";
}

std::vector<Violation> validate_manifest(const std::filesystem::path& path) {
  const auto m = read_manifest(path);
  std::vector<Violation> out;

  std::size_t counted = 0;
  for (auto c : m.counts) counted += c;
  if (counted != m.items.size()) {
    out.push_back({ViolationKind::count_mismatch, "",
                   "label counts sum to " + std::to_string(counted) + " but the manifest lists " +
                       std::to_string(m.items.size()) + " items"});
  }

  std::set<std::string> seen;
  for (const auto& it : m.items) {
    if (!seen.insert(it.id).second) {
      out.push_back({ViolationKind::duplicate_id, it.id, "duplicate item id"});
    }
    for (const auto* rel : {&it.descriptor, &it.audio, &it.cot}) {
      if (!std::filesystem::is_regular_file(m.resolve(*rel))) {
        out.push_back({ViolationKind::missing_file, it.id, "missing " + rel->generic_string()});
      }
    }
    if (std::filesystem::is_regular_file(m.resolve(it.descriptor))) {
      try {
        const auto v = detect::read_descriptor(m.resolve(it.descriptor));
        if (v.id != it.id) {
          out.push_back({ViolationKind::bad_descriptor, it.id, "descriptor id is '" + v.id + "'"});
        }
      } catch (const Error& e) {
        out.push_back({ViolationKind::bad_descriptor, it.id, e.what()});
      }
    }
    if (std::filesystem::is_regular_file(m.resolve(it.cot))) {
      try {
        const auto doc = cot::parse_cot_detail(util::read_text_file(m.resolve(it.cot)));
        if (doc.conclusion_label != it.gold_label) {
          out.push_back({ViolationKind::label_mismatch, it.id,
                         "gold label " + std::string(to_string(it.gold_label)) +
                             " but reasoning concludes " +
                             std::string(to_string(doc.conclusion_label))});
        }
      } catch (const Error& e) {
        out.push_back({ViolationKind::bad_cot, it.id, e.what()});
      }
    }
  }
  return out;
}

LabelStats label_stats(const CorpusManifest& manifest) {
  LabelStats s;
  for (const auto& it : manifest.items) ++s.counts[label_index(it.gold_label)];
  s.total = manifest.items.size();
  if (s.total > 0) {
    for (std::size_t i = 0; i < 4; ++i) {
      s.proportions[i] = static_cast<double>(s.counts[i]) / static_cast<double>(s.total);
    }
  }
  return s;
}

}  // namespace deepsound::dataset
