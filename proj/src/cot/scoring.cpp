#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include "deepsound/cot.hpp"
#include "util/text.hpp"

namespace deepsound::cot {
namespace {

// Section texts recovered without requiring a well-formed document.
struct LenientDoc {
  std::array<std::optional<std::string>, 4> stages;
  double violations = 0.0;
};

std::size_t count_step_lines(std::string_view body) {
  std::size_t n = 0;
  for (auto line : util::split_lines(body)) {
    line = util::trim(line);
    if (!line.starts_with("Step ")) continue;
    auto rest = line.substr(5);
    std::size_t digits = 0;
    while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits]))) ++digits;
    if (digits > 0 && digits < rest.size() && rest[digits] == '.') ++n;
  }
  return n;
}

bool has_answer_line(std::string_view body) {
  auto lines = util::split_lines(body);
  while (!lines.empty() && util::is_blank(lines.back())) lines.pop_back();
  if (lines.empty()) return false;
  const auto last = util::trim(lines.back());
  if (!last.starts_with("Answer:")) return false;
  return parse_label(util::trim(last.substr(7))).has_value();
}

LenientDoc extract(std::string_view raw) {
  const std::string text = util::normalize_newlines(raw);
  LenientDoc doc;
  std::vector<std::size_t> positions;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    const std::string name(tag_name(kSections[s]));
    const std::string open = "<" + name + ">";
    const std::string close = "</" + name + ">";
    const auto p = text.find(open);
    const auto q = p == std::string::npos ? std::string::npos : text.find(close, p + open.size());
    if (q == std::string::npos) {
      doc.violations += 1.0;
      continue;
    }
    doc.stages[s] = std::string(util::trim(std::string_view(text).substr(
        p + open.size(), q - p - open.size())));
    positions.push_back(p);
  }
  if (!std::is_sorted(positions.begin(), positions.end())) doc.violations += 1.0;
  if (doc.stages[2] && count_step_lines(*doc.stages[2]) != 4) doc.violations += 1.0;
  if (doc.stages[3] && !has_answer_line(*doc.stages[3])) doc.violations += 1.0;
  return doc;
}

double stage_distance(const std::optional<std::string>& candidate, const std::string& gold) {
  if (!candidate) return 1.0;
  return normalized_edit_distance(*candidate, gold);
}

bool contains_sequence(const std::vector<std::string>& tokens,
                       const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), needle.begin(), needle.end()) != tokens.end();
}

std::set<std::string> keywords(const std::optional<std::string>& stage,
                               const std::vector<std::string>& lexicon) {
  std::set<std::string> out;
  if (!stage) return out;
  const auto tokens = tokenize(*stage);
  for (const auto& entry : lexicon) {
    if (contains_sequence(tokens, tokenize(entry))) out.insert(entry);
  }
  return out;
}

double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& k : a) inter += b.count(k);
  const std::size_t uni = a.size() + b.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

const std::vector<std::string>& default_lexicon() {
  static const std::vector<std::string> lexicon = {
      "person", "people", "human", "voice", "speech", "voice-over", "silent", "rule"};
  return lexicon;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t token_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::size_t longest = std::max(ta.size(), tb.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(token_edit_distance(ta, tb)) / static_cast<double>(longest);
}

FormatScores format_score(std::string_view candidate_text, const CoTDetail& gold) {
  const auto cand = extract(candidate_text);
  const auto ref = extract(render_cot_detail(gold));
  FormatScores s;
  s.structure = cand.violations;
  s.sm = stage_distance(cand.stages[0], *ref.stages[0]);
  s.cp = stage_distance(cand.stages[1], *ref.stages[1]);
  s.rn = stage_distance(cand.stages[2], *ref.stages[2]);
  s.cc = stage_distance(cand.stages[3], *ref.stages[3]);
  return s;
}

FormatScores format_score(const CoTDetail& candidate, const CoTDetail& gold) {
  return format_score(render_cot_detail(candidate), gold);
}

KeywordScores keyword_score(std::string_view candidate_text, const CoTDetail& gold,
                            const std::vector<std::string>& lexicon) {
  if (lexicon.empty()) throw Error(ErrorKind::argument, "keyword lexicon must not be empty");
  const auto cand = extract(candidate_text);
  const auto ref = extract(render_cot_detail(gold));
  KeywordScores s;
  s.cp = jaccard_distance(keywords(cand.stages[1], lexicon), keywords(ref.stages[1], lexicon));
  s.rn = jaccard_distance(keywords(cand.stages[2], lexicon), keywords(ref.stages[2], lexicon));
  s.cc = jaccard_distance(keywords(cand.stages[3], lexicon), keywords(ref.stages[3], lexicon));
  return s;
}

KeywordScores keyword_score(const CoTDetail& candidate, const CoTDetail& gold,
                            const std::vector<std::string>& lexicon) {
  return keyword_score(render_cot_detail(candidate), gold, lexicon);
}

CoTScores cot_total_score(std::string_view candidate_text, const CoTDetail& gold,
                          const std::vector<std::string>& lexicon) {
  const auto f = format_score(candidate_text, gold);
  const auto k = keyword_score(candidate_text, gold, lexicon);
  CoTScores s;
  s.format_structure = f.structure;
  s.format_sm = f.sm;
  s.format_cp = f.cp;
  s.format_rn = f.rn;
  s.format_cc = f.cc;
  s.format_total = f.total();
  s.keyword_cp = k.cp;
  s.keyword_rn = k.rn;
  s.keyword_cc = k.cc;
  s.total = s.format_total + k.sum();
  return s;
}

CoTScores cot_total_score(const CoTDetail& candidate, const CoTDetail& gold,
                          const std::vector<std::string>& lexicon) {
  return cot_total_score(render_cot_detail(candidate), gold, lexicon);
}

}  // namespace deepsound::cot
