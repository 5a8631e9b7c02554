#include "osp/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "osp/text_io.hpp"

namespace osp {

namespace {

std::string svg_header(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" + fixed(height, 0) +
           "\" viewBox=\"0 0 " + fixed(width, 0) + ' ' + fixed(height, 0) + "\">\n";
}

std::string star(double cx, double cy, double r) {
    std::string pts;
    for (int k = 0; k < 10; ++k) {
        const double rad = (k % 2 == 0) ? r : 0.45 * r;
        const double ang = -M_PI / 2 + k * M_PI / 5;
        pts += fixed(cx + rad * std::cos(ang), 2) + ',' + fixed(cy + rad * std::sin(ang), 2) + ' ';
    }
    return "<polygon points=\"" + pts + "\" fill=\"#e6a700\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
}

// Green (no failures) to red (all failures).
std::string failure_colour(double pr_failure) {
    const double t = std::clamp(pr_failure, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(60 + 195 * t));
    const int g = static_cast<int>(std::lround(170 - 130 * t));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x40", r, g);
    return buf;
}

std::string path_in(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

PlotFiles emit_trajectory_plot(const EpisodeRecord& rec, const std::string& out_dir, const std::string& stem) {
    int nx = rec.nx, ny = rec.ny;
    if (nx < 1 || ny < 1) {
        nx = std::max(rec.start.x, rec.source.x) + 1;
        ny = std::max(rec.start.y, rec.source.y) + 1;
        for (const auto& s : rec.steps) {
            nx = std::max(nx, s.agent.x + 1);
            ny = std::max(ny, s.agent.y + 1);
        }
    }
    std::filesystem::create_directories(out_dir);

    std::string csv = "t,x,y,hits\n0," + std::to_string(rec.start.x) + ',' + std::to_string(rec.start.y) + ",0\n";
    for (std::size_t i = 0; i < rec.steps.size(); ++i) {
        const auto& s = rec.steps[i];
        csv += std::to_string(i + 1) + ',' + std::to_string(s.agent.x) + ',' + std::to_string(s.agent.y) + ',' +
               (s.observation.terminal ? std::string("omega") : std::to_string(s.observation.hits)) + '\n';
    }

    const double cell = std::clamp(600.0 / std::max(nx, ny), 4.0, 30.0);
    const double margin = 20.0;
    const double W = nx * cell + 2 * margin, H = ny * cell + 2 * margin;
    // y grows upward on the grid, downward in SVG
    auto px = [&](int x) { return margin + (x + 0.5) * cell; };
    auto py = [&](int y) { return margin + (ny - 1 - y + 0.5) * cell; };

    std::string svg = svg_header(W, H);
    svg += "<rect x=\"" + fixed(margin, 1) + "\" y=\"" + fixed(margin, 1) + "\" width=\"" + fixed(nx * cell, 1) +
           "\" height=\"" + fixed(ny * cell, 1) + "\" fill=\"#f7f7f7\" stroke=\"#999\"/>\n";
    std::string pts = fixed(px(rec.start.x), 2) + ',' + fixed(py(rec.start.y), 2);
    for (const auto& s : rec.steps) pts += ' ' + fixed(px(s.agent.x), 2) + ',' + fixed(py(s.agent.y), 2);
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"" + fixed(cell * 0.25, 2) +
           "\"/>\n";
    for (const auto& s : rec.steps) {
        if (!s.observation.terminal && s.observation.hits > 0) {
            svg += star(px(s.agent.x), py(s.agent.y), cell * (0.35 + 0.1 * std::min(s.observation.hits, 3)));
        }
    }
    svg += "<circle cx=\"" + fixed(px(rec.start.x), 2) + "\" cy=\"" + fixed(py(rec.start.y), 2) + "\" r=\"" +
           fixed(cell * 0.45, 2) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    const double sx = px(rec.source.x), sy = py(rec.source.y), arm = cell * 0.45;
    svg += "<path d=\"M" + fixed(sx - arm, 2) + ',' + fixed(sy - arm, 2) + " L" + fixed(sx + arm, 2) + ',' +
           fixed(sy + arm, 2) + " M" + fixed(sx - arm, 2) + ',' + fixed(sy + arm, 2) + " L" + fixed(sx + arm, 2) + ',' +
           fixed(sy - arm, 2) + "\" stroke=\"#c00000\" stroke-width=\"3\"/>\n";
    svg += "</svg>\n";

    PlotFiles files{path_in(out_dir, stem + "_trajectory.svg"), path_in(out_dir, stem + "_trajectory.csv")};
    write_file(files.data, csv);
    write_file(files.image, svg);
    return files;
}

PlotFiles emit_report_plot(const std::vector<BenchmarkReport>& rows, const std::string& out_dir,
                           const std::string& stem) {
    if (rows.empty()) throw std::invalid_argument("plot: empty report");
    std::filesystem::create_directories(out_dir);

    std::string csv = "order,case,policy,mean_T,pr_failure\n";
    double top = 1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv += std::to_string(i) + ',' + r.case_name + ',' + r.policy + ',' +
               (r.mean_T ? fixed(*r.mean_T, 6) : std::string("NA")) + ',' + fixed(r.pr_failure, 6) + '\n';
        if (r.mean_T) top = std::max(top, *r.mean_T);
    }

    const double bar = 40.0, gap = 20.0, left = 60.0, bottom = 120.0, height = 300.0, topm = 20.0;
    const double W = left + rows.size() * (bar + gap) + gap, H = topm + height + bottom;
    std::string svg = svg_header(W, H);
    svg += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(topm + height, 1) + "\" x2=\"" + fixed(W - gap / 2, 1) +
           "\" y2=\"" + fixed(topm + height, 1) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"10\" y=\"" + fixed(topm + 10, 1) + "\" font-size=\"12\">Mean(T) max " + fixed(top, 1) +
           "</text>\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double x = left + gap + i * (bar + gap);
        const double h = r.mean_T ? height * (*r.mean_T / top) : 0.0;
        svg += "<rect x=\"" + fixed(x, 1) + "\" y=\"" + fixed(topm + height - h, 1) + "\" width=\"" + fixed(bar, 1) +
               "\" height=\"" + fixed(h, 1) + "\" fill=\"" + failure_colour(r.pr_failure) + "\"/>\n";
        svg += "<text transform=\"translate(" + fixed(x + bar / 2, 1) + ',' + fixed(topm + height + 8, 1) +
               ") rotate(60)\" font-size=\"11\">" + r.case_name + " / " + r.policy + "</text>\n";
    }
    svg += "</svg>\n";

    PlotFiles files{path_in(out_dir, stem + "_bars.svg"), path_in(out_dir, stem + "_bars.csv")};
    write_file(files.data, csv);
    write_file(files.image, svg);
    return files;
}

}  // namespace osp
