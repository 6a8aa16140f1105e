#ifndef HZREACH_RENDER_HPP_
#define HZREACH_RENDER_HPP_

#include "hzreach/hybzono.hpp"

#include <string>
#include <vector>

namespace hz
{

struct RenderBounds
{
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
};

struct RenderLayer
{
    HybridZonotope set;
    std::string color = "#4878cf";
    double opacity = 0.6;
};

struct RenderPath
{
    std::vector<Vector> points; // polyline in set coordinates
    std::string color = "#222222";
};

/// Rasterized rendering of planar sets: one membership query per grid cell
/// (exact per pixel). Output carries no timestamps, so files are stable for
/// golden-file comparison.
std::string render_sets_svg(const std::vector<RenderLayer>& layers,
                            const std::vector<RenderPath>& paths, const RenderBounds& bounds,
                            int resolution = 80, const SolverOptions& opts = {});

} // namespace hz

#endif
