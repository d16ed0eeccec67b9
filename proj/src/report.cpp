#include "mer/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mer {
namespace {

std::string fmt(double v, int decimals = 3) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string model_display(const std::string& model) {
  return model == "svr" ? "Support Vector Regression (SVR)" : "Random Forest (RF)";
}

std::string target_display(const std::string& target) {
  return target == "valence" ? "Valence" : "Arousal";
}

std::string cell_name(const BenchmarkRow& row) {
  return row.model + "/" + row.target + "/" + row.feature_set;
}

const char* kCellColors[8] = {"#d62728", "#ff9896", "#1f77b4", "#aec7e8",
                              "#2ca02c", "#98df8a", "#9467bd", "#c5b0d5"};

}  // namespace

std::string render_markdown(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "| Model | Type | Feature Set | Use Features | Score | STD |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    out << "| " << model_display(row.model) << " | " << target_display(row.target) << " | "
        << row.feature_set << " | " << row.n_features << " | " << fmt(row.score) << " | "
        << fmt(row.std_dev) << " |\n";
  }
  out << "\n| Model | Type | SFS - CFS | Dimension Reduce |\n";
  out << "|---|---|---|---|\n";
  for (const auto& [key, delta] : report.deltas) {
    out << "| " << model_display(key.first) << " | " << target_display(key.second) << " | "
        << fmt(delta) << " | " << fmt(report.reduction_rates.at(key) * 100.0, 1) << "% |\n";
  }
  return out.str();
}

std::string render_fold_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "model,target,feature_set,fold,r2,mse\n";
  char buf[40];
  for (const auto& row : report.rows) {
    for (std::size_t f = 0; f < row.fold_scores.size(); ++f) {
      out << row.model << ',' << row.target << ',' << row.feature_set << ',' << f << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", row.fold_scores[f]);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", row.fold_losses[f]);
      out << buf << '\n';
    }
  }
  return out.str();
}

std::string render_score_bars_svg(const BenchmarkReport& report) {
  const int width = 760, height = 420, margin = 60;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  double max_score = 0.0;
  for (const auto& row : report.rows) max_score = std::max(max_score, row.score);
  if (max_score <= 0.0) max_score = 1.0;
  max_score *= 1.15;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";

  const double slot = plot_w / static_cast<double>(report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    const double h = std::max(0.0, row.score) / max_score * plot_h;
    const double x = margin + slot * static_cast<double>(i) + slot * 0.15;
    const double y = height - margin - h;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.7 << "\" height=\""
        << h << "\" fill=\"" << kCellColors[i % 8] << "\"/>\n";
    out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << height - margin + 14
        << "\" font-size=\"9\" text-anchor=\"middle\">" << row.model << "/"
        << row.target.substr(0, 3) << "/" << row.feature_set << "</text>\n";
    out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << y - 4
        << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(row.score) << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
      << "Mean " << report.k << "-fold R2 by benchmark cell</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_fold_lines_svg(const BenchmarkReport& report) {
  const int width = 760, height = 420, margin = 60;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  double lo = 0.0, hi = 1.0;
  for (const auto& row : report.rows) {
    for (double s : row.fold_scores) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  const double span = (hi - lo) > 0 ? hi - lo : 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    const std::size_t k = row.fold_scores.size();
    out << "<polyline fill=\"none\" stroke=\"" << kCellColors[i % 8] << "\" points=\"";
    for (std::size_t f = 0; f < k; ++f) {
      const double x = margin + plot_w * static_cast<double>(f) / static_cast<double>(k - 1);
      const double y = height - margin - (row.fold_scores[f] - lo) / span * plot_h;
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 14 * (i + 1)
        << "\" font-size=\"9\" fill=\"" << kCellColors[i % 8] << "\">" << cell_name(row)
        << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
      << "Per-fold R2</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_va_scatter_svg(const CategorizeResult& categorized) {
  const int size = 520, margin = 30;
  const double plot = size - 2.0 * margin;
  auto to_x = [&](double v) { return margin + (v + 1.0) / 2.0 * plot; };
  auto to_y = [&](double a) { return size - margin - (a + 1.0) / 2.0 * plot; };

  // Fig-3 convention for the four quadrant labels, a fixed cycle otherwise.
  std::map<std::string, std::string> colors;
  std::size_t next = 0;
  auto color_of = [&](const std::string& label) -> std::string {
    if (label == "Q1_happy_excited") return "red";
    if (label == "Q2_angry_afraid") return "green";
    if (label == "Q3_sad_depressed") return "blue";
    if (label == "Q4_calm_content") return "#e6c800";
    auto it = colors.find(label);
    if (it == colors.end()) it = colors.emplace(label, kCellColors[next++ % 8]).first;
    return it->second;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << to_x(-1) << "\" y1=\"" << to_y(0) << "\" x2=\"" << to_x(1)
      << "\" y2=\"" << to_y(0) << "\" stroke=\"#999\"/>\n";
  out << "<line x1=\"" << to_x(0) << "\" y1=\"" << to_y(-1) << "\" x2=\"" << to_x(0)
      << "\" y2=\"" << to_y(1) << "\" stroke=\"#999\"/>\n";
  for (const auto& p : categorized.points) {
    out << "<circle cx=\"" << to_x(p.point.valence) << "\" cy=\"" << to_y(p.point.arousal)
        << "\" r=\"3\" fill=\"" << color_of(p.label) << "\"/>\n";
  }
  int row = 0;
  for (const auto& [label, count] : categorized.counts) {
    out << "<rect x=\"8\" y=\"" << 8 + row * 16 << "\" width=\"10\" height=\"10\" fill=\""
        << color_of(label) << "\"/>\n";
    out << "<text x=\"22\" y=\"" << 17 + row * 16 << "\" font-size=\"11\">" << label << " ("
        << count << ")</text>\n";
    ++row;
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_categorized_csv(const CategorizeResult& categorized) {
  std::ostringstream out;
  out << "id,valence,arousal,label\n";
  char buf[40];
  for (const auto& p : categorized.points) {
    out << p.id << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", p.point.valence);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", p.point.arousal);
    out << buf << ',' << p.label << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& content, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mer
