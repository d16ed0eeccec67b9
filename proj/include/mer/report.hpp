#pragma once

#include <filesystem>
#include <string>

#include "mer/emotion.hpp"
#include "mer/evaluation.hpp"

namespace mer {

// Markdown table with the columns Model, Type, Feature Set, Use Features,
// Score, STD, followed by the delta / reduction-rate summary.
std::string render_markdown(const BenchmarkReport& report);

// Per-fold CSV: model,target,feature_set,fold,r2,mse
std::string render_fold_csv(const BenchmarkReport& report);

// Grouped bar chart of cell scores.
std::string render_score_bars_svg(const BenchmarkReport& report);

// Per-fold score lines, one series per (model, target, feature set) cell.
std::string render_fold_lines_svg(const BenchmarkReport& report);

// VA scatter colored by label (red/green/blue/yellow for Q1..Q4, an eight
// color cycle in Hevner mode).
std::string render_va_scatter_svg(const CategorizeResult& categorized);

std::string render_categorized_csv(const CategorizeResult& categorized);

// Atomic text file write.
void write_text_file(const std::string& content, const std::filesystem::path& path);

}  // namespace mer
