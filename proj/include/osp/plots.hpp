#pragma once

#include <string>
#include <vector>

#include "osp/evaluation.hpp"

namespace osp {

struct PlotFiles {
    std::string image;  // SVG
    std::string data;   // CSV the image was drawn from
};

/// Search path on the grid: start circle, source cross, path, and a star at
/// every step with hits. Data CSV: t,x,y,hits with t = 0 for the start cell.
PlotFiles emit_trajectory_plot(const EpisodeRecord& record, const std::string& out_dir, const std::string& stem);

/// One bar per report row, in row order, height Mean(T), colour by
/// Pr(failure). Throws std::invalid_argument for an empty report before
/// touching the filesystem.
PlotFiles emit_report_plot(const std::vector<BenchmarkReport>& rows, const std::string& out_dir,
                           const std::string& stem);

}  // namespace osp
