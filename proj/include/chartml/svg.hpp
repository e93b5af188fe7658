#pragma once

#include <span>
#include <string>
#include <utility>

#include "chartml/matrix.hpp"

namespace chartml::svg {

/// Horizontal bar chart, one bar per item in the given (already ranked)
/// order, with the value printed at the bar end. Self-contained SVG.
std::string bar_chart(std::span<const std::pair<std::string, double>> items,
                      const std::string& title);

/// Square heatmap of a symmetric matrix in [-1, 1] with a blue-white-red
/// diverging scale and the value annotated in each cell.
std::string heatmap(const Matrix& values, std::span<const std::string> labels,
                    const std::string& title);

}  // namespace chartml::svg
