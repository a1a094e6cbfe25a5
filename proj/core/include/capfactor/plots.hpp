#pragma once

#include <string>
#include <vector>

#include "capfactor/descriptives.hpp"
#include "capfactor/factor_models.hpp"
#include "capfactor/pca.hpp"
#include "capfactor/scaling_laws.hpp"
#include "capfactor/score_data.hpp"

namespace capfactor {

/// Self-contained SVG documents. Output depends only on the inputs.

std::string heatmap_svg(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title);

std::string bar_chart_svg(const Vector& values, const std::vector<std::string>& labels, const std::string& title);

/// Real vs. simulated eigenvalues by rank.
std::string scree_svg(const ParallelResult& pa, const std::string& title);

/// Grid of per-subtask scatter plots (score vs ln params) with the fitted
/// 3PL curve.
std::string item_fit_panel_svg(const Dataset& ds, const std::vector<ItemFit>& fits);

/// One panel per capability: score against ln params with a logistic trend.
std::string capability_scatter_svg(const Matrix& scores, const Vector& log_n, const std::string& title);

}  // namespace capfactor
