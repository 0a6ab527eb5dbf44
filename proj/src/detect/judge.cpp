#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deepsound/detect.hpp"

namespace deepsound::detect {

using nlohmann::json;

void validate(const VideoDescriptor& video) {
  if (!(video.duration > 0.0)) throw Error(ErrorKind::argument, "descriptor duration must be positive");
  for (const auto& s : video.person_segments) {
    if (s.t0 < 0.0 || s.t1 > video.duration + 1e-9 || s.t1 < s.t0) {
      throw Error(ErrorKind::argument, "person segment outside [0, duration]");
    }
  }
  for (std::size_t i = 0; i < video.onset_times.size(); ++i) {
    const double t = video.onset_times[i];
    if (t < 0.0 || t > video.duration) throw Error(ErrorKind::argument, "onset outside [0, duration]");
    if (i > 0 && t < video.onset_times[i - 1]) {
      throw Error(ErrorKind::argument, "onset times must be ascending");
    }
  }
}

VideoDescriptor parse_descriptor(std::string_view json_text) {
  VideoDescriptor v;
  try {
    const auto j = json::parse(json_text);
    v.id = j.at("id").get<std::string>();
    v.duration = j.at("duration").get<double>();
    for (const auto& seg : j.value("person_segments", json::array())) {
      if (!seg.is_array() || seg.size() != 2) {
        throw Error(ErrorKind::format, "person_segments entries must be [t0, t1]");
      }
      v.person_segments.push_back({seg[0].get<double>(), seg[1].get<double>()});
    }
    v.scene_tags = j.value("scene_tags", std::vector<std::string>{});
    v.onset_times = j.value("onset_times", std::vector<double>{});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("invalid video descriptor: ") + e.what());
  }
  if (v.id.empty()) throw Error(ErrorKind::format, "descriptor id must not be empty");
  validate(v);
  return v;
}

std::string descriptor_to_json(const VideoDescriptor& video) {
  json j;
  j["id"] = video.id;
  j["duration"] = video.duration;
  j["person_segments"] = json::array();
  for (const auto& s : video.person_segments) j["person_segments"].push_back({s.t0, s.t1});
  j["scene_tags"] = video.scene_tags;
  j["onset_times"] = video.onset_times;
  return j.dump(2) + "\n";
}

VideoDescriptor read_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open descriptor " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_descriptor(ss.str());
}

void write_descriptor(const std::filesystem::path& path, const VideoDescriptor& video) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write descriptor " + path.string());
  out << descriptor_to_json(video);
}

VerdictLabel classify_voiceover(bool person, bool voice) noexcept {
  if (!person) return voice ? VerdictLabel::yes : VerdictLabel::no1;
  return voice ? VerdictLabel::no2 : VerdictLabel::no3;
}

std::string_view to_string(Mode mode) noexcept { return mode == Mode::qa ? "QA" : "CoT"; }

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  if (text == "QA" || text == "qa") return Mode::qa;
  if (text == "CoT" || text == "cot" || text == "COT") return Mode::cot;
  return std::nullopt;
}

bool person_present(const VideoDescriptor& video) {
  double covered = 0.0;
  for (const auto& s : normalize_spans(video.person_segments, video.duration)) covered += s.length();
  return covered >= kPersonCoverage * video.duration;
}

cot::CoTDetail build_verdict_cot(bool person, bool voice,
                                 const std::vector<std::string>& scene_tags) {
  const auto label = classify_voiceover(person, voice);
  cot::CoTDetail doc;
  doc.summary =
      "Decide whether the audio contains voice-over by checking for a visible person in the "
      "video and a human voice in the audio, then apply the voice-over rule.";

  std::string scene = "The scene";
  if (!scene_tags.empty()) {
    scene += " (";
    for (std::size_t i = 0; i < scene_tags.size(); ++i) {
      if (i) scene += ", ";
      scene += scene_tags[i];
    }
    scene += ")";
  }
  doc.caption = scene + (person ? " shows people on screen" : " shows no people on screen") +
                (voice ? ", and the audio carries a human voice." :
                         ", and the audio carries no human voice.");

  doc.reasoning[0] =
      "The voice-over judgment follows a rule over two facts: whether a person is visible and "
      "whether a human voice is audible.";
  doc.reasoning[1] =
      "Rule: a human voice with no person in the video is voice-over; every other combination "
      "is not voice-over.";
  doc.reasoning[2] = std::string("Person in video: ") + (person ? "yes" : "no") +
                     ". Human voice in audio: " + (voice ? "yes" : "no") + ".";
  doc.reasoning[3] = "Apply the rule to these facts and give the answer.";

  switch (label) {
    case VerdictLabel::yes:
      doc.conclusion = "A voice is heard while no person is visible, so the sample has voice-over.";
      break;
    case VerdictLabel::no1:
      doc.conclusion = "No person is visible and no voice is heard, so there is no voice-over.";
      break;
    case VerdictLabel::no2:
      doc.conclusion = "The voice belongs to people visible on screen, so there is no voice-over.";
      break;
    case VerdictLabel::no3:
      doc.conclusion = "People are visible but silent, so there is no voice-over.";
      break;
  }
  doc.conclusion_label = label;
  return doc;
}

VoiceOverVerdict judge(const VideoDescriptor& video, const audio::Waveform& audio, Mode mode) {
  if (std::abs(audio.duration() - video.duration) > kAlignmentTolerance) {
    throw Error(ErrorKind::alignment,
                "audio duration " + std::to_string(audio.duration()) +
                    " s does not match video duration " + std::to_string(video.duration) + " s");
  }
  VoiceOverVerdict v;
  v.mode = mode;
  v.person_present = person_present(video);

  const auto frames = analyze_frames(audio);
  auto voiced = segments_from_frames(frames, DetectorProfile::qa());
  if (mode == Mode::cot) {
    // Step 3 second pass with the more sensitive profile; union keeps the QA
    // findings so CoT detections are always a superset.
    auto second = segments_from_frames(frames, DetectorProfile::cot());
    voiced.insert(voiced.end(), second.begin(), second.end());
    voiced = normalize_spans(std::move(voiced), audio.duration());
  }
  v.voiced_segments = std::move(voiced);
  v.voice_present = !v.voiced_segments.empty();
  v.label = classify_voiceover(v.person_present, v.voice_present);
  if (mode == Mode::cot) {
    v.cot = build_verdict_cot(v.person_present, v.voice_present, video.scene_tags);
  }
  return v;
}

double voice_energy_ratio(const audio::Waveform& w, const std::vector<TimeSpan>& voiced) {
  const double total = audio::energy(w.samples());
  if (total <= 0.0) return 0.0;
  double inside = 0.0;
  for (const auto& s : normalize_spans(voiced, w.duration())) {
    const auto i0 = w.index_at(s.t0);
    const auto i1 = w.index_at(s.t1);
    inside += audio::energy(w.samples().subspan(i0, i1 - i0));
  }
  return std::min(1.0, inside / total);
}

}  // namespace deepsound::detect
