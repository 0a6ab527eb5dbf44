#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "deepsound/eval.hpp"
#include "util/file_io.hpp"

namespace deepsound::eval {
namespace {

using nlohmann::json;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pct_cell(double pct) { return std::isnan(pct) ? "n/a" : fixed(pct) + "%"; }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void MetricReport::validate() const {
  if (rows.empty()) throw Error(ErrorKind::empty_input, "metric report has no rows");
  for (const auto& r : rows) {
    if (r.fd.size() != embedders.size() || r.kl.size() != classifiers.size()) {
      throw Error(ErrorKind::shape, "row '" + r.method + "' does not match the report columns");
    }
    for (double v : r.fd) {
      if (!finite(v) || v < 0.0) throw Error(ErrorKind::argument, "FD must be finite and >= 0");
    }
    for (double v : r.kl) {
      if (!finite(v) || v < 0.0) throw Error(ErrorKind::argument, "KL must be finite and >= 0");
    }
    if (!finite(r.is) || r.is < 1.0) throw Error(ErrorKind::argument, "IS must be >= 1");
    if (!finite(r.ib) || r.ib < -1.0 || r.ib > 1.0) {
      throw Error(ErrorKind::argument, "IB score must lie in [-1, 1]");
    }
    if (!finite(r.desync) || r.desync < 0.0) throw Error(ErrorKind::argument, "DeSync must be >= 0");
  }
}

std::vector<MetricColumn> report_columns(const MetricReport& report) {
  std::vector<MetricColumn> cols;
  for (std::size_t i = 0; i < report.embedders.size(); ++i) {
    cols.push_back({"FD_" + report.embedders[i], Direction::lower_better, nullptr, i, true});
  }
  for (std::size_t i = 0; i < report.classifiers.size(); ++i) {
    cols.push_back({"KL_" + report.classifiers[i], Direction::lower_better, nullptr, i, false});
  }
  cols.push_back({"IS", Direction::higher_better, &MethodRow::is});
  cols.push_back({"IB", Direction::higher_better, &MethodRow::ib});
  cols.push_back({"DeSync", Direction::lower_better, &MethodRow::desync});
  return cols;
}

double column_value(const MethodRow& row, const MetricColumn& column) {
  if (column.scalar) return row.*column.scalar;
  return column.is_fd ? row.fd.at(column.index) : row.kl.at(column.index);
}

const MethodRow& reference_row(const MetricReport& report) {
  if (report.rows.empty()) throw Error(ErrorKind::empty_input, "metric report has no rows");
  for (const auto& r : report.rows) {
    if (r.method == "Direct" || r.method == "direct") return r;
  }
  return report.rows.front();
}

std::string render_report_table(const MetricReport& report) {
  report.validate();
  const auto cols = report_columns(report);
  const auto& ref = reference_row(report);

  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Method"});
  for (const auto& c : cols) {
    grid.back().push_back(c.name + (c.direction == Direction::lower_better ? " (lower)" : " (higher)"));
  }
  for (const auto& r : report.rows) {
    std::vector<std::string> line{r.method};
    for (const auto& c : cols) {
      const double v = column_value(r, c);
      std::string cell = fixed(v);
      if (&r != &ref) cell += " (" + pct_cell(improvement_pct(column_value(ref, c), v, c.direction)) + ")";
      line.push_back(cell);
    }
    grid.push_back(std::move(line));
  }

  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  for (std::size_t li = 0; li < grid.size(); ++li) {
    for (std::size_t i = 0; i < grid[li].size(); ++i) {
      const auto& cell = grid[li][i];
      if (i == 0) {
        out << cell << std::string(width[i] - cell.size(), ' ');
      } else {
        out << "  " << std::string(width[i] - cell.size(), ' ') << cell;
      }
    }
    out << "\n";
    if (li == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << "\n";
    }
  }
  out << "\n"
      << "Percentages are improvements over the " << ref.method
      << " row: (ref - x)/ref for lower-is-better columns, (x - ref)/ref otherwise.\n"
      << "They are recomputed from the printed values, so they can differ slightly from\n"
      << "figures derived from unrounded inputs.\n"
      << "IB and DeSync are event-alignment proxies and are not comparable with scores\n"
      << "from pretrained audio-visual models.\n";
  return out.str();
}

std::string report_to_json(const MetricReport& report) {
  report.validate();
  const auto cols = report_columns(report);
  const auto& ref = reference_row(report);
  json j;
  j["embedders"] = report.embedders;
  j["classifiers"] = report.classifiers;
  j["reference"] = ref.method;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["method"] = r.method;
    row["fd"] = json::object();
    for (std::size_t i = 0; i < r.fd.size(); ++i) row["fd"][report.embedders[i]] = r.fd[i];
    row["kl"] = json::object();
    for (std::size_t i = 0; i < r.kl.size(); ++i) row["kl"][report.classifiers[i]] = r.kl[i];
    row["is"] = r.is;
    row["ib"] = r.ib;
    row["desync"] = r.desync;
    json imp = json::object();
    for (const auto& c : cols) {
      const double p = improvement_pct(column_value(ref, c), column_value(r, c), c.direction);
      imp[c.name] = std::isnan(p) ? json(nullptr) : json(p);
    }
    row["improvement_pct"] = imp;
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

MetricReport parse_report_json(std::string_view text) {
  MetricReport report;
  try {
    const auto j = json::parse(text);
    report.embedders = j.at("embedders").get<std::vector<std::string>>();
    report.classifiers = j.at("classifiers").get<std::vector<std::string>>();
    auto slot = [](const json& field, const std::vector<std::string>& names) {
      std::vector<double> out;
      if (field.is_array()) return field.get<std::vector<double>>();
      for (const auto& n : names) out.push_back(field.at(n).get<double>());
      return out;
    };
    for (const auto& r : j.at("rows")) {
      MethodRow row;
      row.method = r.at("method").get<std::string>();
      row.fd = slot(r.at("fd"), report.embedders);
      row.kl = slot(r.at("kl"), report.classifiers);
      row.is = r.at("is").get<double>();
      row.ib = r.at("ib").get<double>();
      row.desync = r.at("desync").get<double>();
      report.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("invalid metric report JSON: ") + e.what());
  }
  report.validate();
  return report;
}

void emit_report(const MetricReport& report, const std::filesystem::path& out_dir) {
  report.validate();
  util::write_text_file(out_dir / "report.txt", render_report_table(report));
  util::write_text_file(out_dir / "report.json", report_to_json(report));

  const auto& ref = reference_row(report);
  for (const auto& c : report_columns(report)) {
    std::string csv = "method,value,improvement_pct\n";
    for (const auto& r : report.rows) {
      const double v = column_value(r, c);
      const double p = improvement_pct(column_value(ref, c), v, c.direction);
      csv += r.method + "," + fixed(v, 6) + "," + (std::isnan(p) ? "" : fixed(p, 4)) + "\n";
    }
    util::write_text_file(out_dir / "plots" / (c.name + ".csv"), csv);
  }
}

QaCotReport qa_cot_report(const std::vector<JudgedItem>& items) {
  if (items.empty()) throw Error(ErrorKind::empty_input, "QA/CoT report needs a non-empty corpus");
  QaCotReport r;
  double qa_sum = 0.0;
  double cot_sum = 0.0;
  for (const auto& item : items) {
    const auto qa = detect::judge(item.video, item.audio, detect::Mode::qa);
    const auto cot = detect::judge(item.video, item.audio, detect::Mode::cot);
    const bool qa_yes = qa.label == VerdictLabel::yes;
    const bool cot_yes = cot.label == VerdictLabel::yes;
    if (qa_yes) {
      ++r.qa_num;
      qa_sum += detect::voice_energy_ratio(item.audio, qa.voiced_segments);
    }
    if (cot_yes) {
      ++r.cot_num;
      cot_sum += detect::voice_energy_ratio(item.audio, cot.voiced_segments);
    }
    if (qa_yes || cot_yes) ++r.total;
  }
  r.qa_ratio = r.qa_num ? qa_sum / static_cast<double>(r.qa_num) : 0.0;
  r.cot_ratio = r.cot_num ? cot_sum / static_cast<double>(r.cot_num) : 0.0;
  return r;
}

std::string format_qa_cot_row(const std::string& label, const QaCotReport& r) {
  return label + ", " + fixed(100.0 * r.qa_ratio) + "%, " + fixed(100.0 * r.cot_ratio) + "%, " +
         std::to_string(r.qa_num) + ", " + std::to_string(r.cot_num) + ", " +
         std::to_string(r.total);
}

}  // namespace deepsound::eval
