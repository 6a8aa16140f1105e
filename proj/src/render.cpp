#include "hzreach/render.hpp"

#include <cstdio>
#include <sstream>

namespace hz
{

namespace
{

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string render_sets_svg(const std::vector<RenderLayer>& layers,
                            const std::vector<RenderPath>& paths, const RenderBounds& bounds,
                            int resolution, const SolverOptions& opts)
{
    require(resolution >= 2, "render: resolution too small");
    const double W = 480.0, H = 480.0;
    const double dx = (bounds.xmax - bounds.xmin) / resolution;
    const double dy = (bounds.ymax - bounds.ymin) / resolution;
    auto px = [&](double x) { return (x - bounds.xmin) / (bounds.xmax - bounds.xmin) * W; };
    auto py = [&](double y) { return H - (y - bounds.ymin) / (bounds.ymax - bounds.ymin) * H; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";

    const double cw = W / resolution;
    const double ch = H / resolution;
    for (const RenderLayer& layer : layers)
    {
        require(layer.set.dim() == 2, "render: layers must be planar sets");
        svg << "<g fill=\"" << layer.color << "\" fill-opacity=\"" << layer.opacity << "\">\n";
        for (int i = 0; i < resolution; ++i)
        {
            for (int j = 0; j < resolution; ++j)
            {
                Vector p(2);
                p << bounds.xmin + (i + 0.5) * dx, bounds.ymin + (j + 0.5) * dy;
                if (contains_point(layer.set, p, opts))
                {
                    svg << "<rect x=\"" << fmt(i * cw) << "\" y=\"" << fmt(H - (j + 1) * ch)
                        << "\" width=\"" << fmt(cw) << "\" height=\"" << fmt(ch) << "\"/>\n";
                }
            }
        }
        svg << "</g>\n";
    }

    for (const RenderPath& path : paths)
    {
        if (path.points.size() < 2)
            continue;
        svg << "<polyline fill=\"none\" stroke=\"" << path.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < path.points.size(); ++i)
        {
            if (i)
                svg << " ";
            svg << fmt(px(path.points[i](0))) << "," << fmt(py(path.points[i](1)));
        }
        svg << "\"/>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace hz
