// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/geometry.hpp>

#include <vector>

namespace layoutloop
{

double union_area(std::span<const Rect> rects)
{
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r: rects)
    {
        if (r.empty())
            continue;
        xs.push_back(r.x0);
        xs.push_back(r.x1);
        ys.push_back(r.y0);
        ys.push_back(r.y1);
    }
    if (xs.empty())
        return 0.0;

    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    double total = 0.0;
    for (size_t i = 0; i + 1 < xs.size(); ++i)
    {
        for (size_t j = 0; j + 1 < ys.size(); ++j)
        {
            const double cx = 0.5 * (xs[i] + xs[i + 1]);
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            for (const auto& r: rects)
            {
                if (!r.empty() && cx >= r.x0 && cx < r.x1 && cy >= r.y0 && cy < r.y1)
                {
                    total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return total;
}

} // namespace layoutloop
