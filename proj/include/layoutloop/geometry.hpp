// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <span>

namespace layoutloop
{

/// Axis-aligned rectangle [x0, x1) x [y0, y1) in canvas pixels.
struct Rect
{
    double x0 = 0;
    double y0 = 0;
    double x1 = 0;
    double y1 = 0;

    [[nodiscard]] double width() const noexcept { return std::max(0.0, x1 - x0); }
    [[nodiscard]] double height() const noexcept { return std::max(0.0, y1 - y0); }
    [[nodiscard]] double area() const noexcept { return width() * height(); }
    [[nodiscard]] bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
    [[nodiscard]] double center_x() const noexcept { return 0.5 * (x0 + x1); }
    [[nodiscard]] double center_y() const noexcept { return 0.5 * (y0 + y1); }

    [[nodiscard]] Rect translated(double dx, double dy) const noexcept
    {
        return { x0 + dx, y0 + dy, x1 + dx, y1 + dy };
    }

    bool operator==(const Rect&) const = default;
};

[[nodiscard]] inline Rect intersect(const Rect& a, const Rect& b) noexcept
{
    return { std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1) };
}

/// Smallest rectangle containing both; an empty operand is ignored.
[[nodiscard]] inline Rect bounding_union(const Rect& a, const Rect& b) noexcept
{
    if (a.empty())
        return b;
    if (b.empty())
        return a;
    return { std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1) };
}

/// Exact area of the union of rectangles (coordinate compression, O(n^3)).
[[nodiscard]] double union_area(std::span<const Rect> rects);

} // namespace layoutloop
