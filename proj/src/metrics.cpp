// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/metrics.hpp>

#include <cmath>
#include <limits>

namespace layoutloop
{

double r_ali(const LayoutDocument& doc, const AdvanceModel& model)
{
    std::vector<Rect> boxes;
    for (const auto* t: doc.texts())
        if (!t->content.empty())
            boxes.push_back(text_bbox(*t, model));
    if (boxes.size() < 2)
        return 0.0;

    const double w = doc.canvas.width;
    const double h = doc.canvas.height;
    double total = 0.0;
    for (size_t i = 0; i < boxes.size(); ++i)
    {
        const auto& a = boxes[i];
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < boxes.size(); ++j)
        {
            if (i == j)
                continue;
            const auto& b = boxes[j];
            best = std::min({ best, std::abs(a.x0 - b.x0) / w, std::abs(a.center_x() - b.center_x()) / w,
                              std::abs(a.x1 - b.x1) / w, std::abs(a.y0 - b.y0) / h,
                              std::abs(a.center_y() - b.center_y()) / h, std::abs(a.y1 - b.y1) / h });
        }
        total += best;
    }
    return total / static_cast<double>(boxes.size());
}

double r_ove(const LayoutDocument& doc, const AdvanceModel& model, std::vector<std::string>* flags)
{
    std::vector<Rect> boxes;
    std::vector<std::string> ids;
    for (const auto* t: doc.texts())
    {
        boxes.push_back(text_bbox(*t, model));
        ids.push_back(t->id);
    }
    const size_t n = boxes.size();
    if (n < 2)
        return 0.0;

    double total = 0.0;
    for (size_t i = 0; i < n; ++i)
    {
        const double area = boxes[i].area();
        if (area <= 0)
        {
            if (flags)
                flags->push_back("r_ove: zero-area box '" + ids[i] + "'");
            continue;
        }
        for (size_t j = 0; j < n; ++j)
            if (i != j)
                total += intersect(boxes[i], boxes[j]).area() / area;
    }
    return total / static_cast<double>(n * (n - 1));
}

LuminanceRaster sobel_magnitude(const LuminanceRaster& raster)
{
    LuminanceRaster out(raster.width, raster.height);
    const auto px = [&](int x, int y) {
        x = std::clamp(x, 0, raster.width - 1);
        y = std::clamp(y, 0, raster.height - 1);
        return raster.at(x, y);
    };
    for (int y = 0; y < raster.height; ++y)
    {
        for (int x = 0; x < raster.width; ++x)
        {
            // Paired differences first, so a flat neighbourhood gives exactly zero.
            const double gx = ((px(x + 1, y - 1) - px(x - 1, y - 1)) + 2 * (px(x + 1, y) - px(x - 1, y))
                               + (px(x + 1, y + 1) - px(x - 1, y + 1)))
                              / 8.0;
            const double gy = ((px(x - 1, y + 1) - px(x - 1, y - 1)) + 2 * (px(x, y + 1) - px(x, y - 1))
                               + (px(x + 1, y + 1) - px(x + 1, y - 1)))
                              / 8.0;
            out.at(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

double r_com(const LayoutDocument& doc, const RenderResult& render, const LuminanceRaster& background,
             std::vector<std::string>* flags)
{
    const int width = doc.canvas.width;
    const int height = doc.canvas.height;
    const LuminanceRaster bg = (background.width == width && background.height == height)
                                   ? background
                                   : background.resized(width, height);

    std::vector<Rect> boxes;
    for (const auto& [id, box]: render.element_bboxes)
        if (!box.empty())
            boxes.push_back(box);

    // Pixels whose centers lie inside at least one box.
    std::vector<char> mask(static_cast<size_t>(width) * height, 0);
    size_t count = 0;
    for (const auto& b: boxes)
    {
        const int x0 = std::clamp(static_cast<int>(std::ceil(b.x0 - 0.5)), 0, width);
        const int x1 = std::clamp(static_cast<int>(std::ceil(b.x1 - 0.5)), 0, width);
        const int y0 = std::clamp(static_cast<int>(std::ceil(b.y0 - 0.5)), 0, height);
        const int y1 = std::clamp(static_cast<int>(std::ceil(b.y1 - 0.5)), 0, height);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x)
            {
                auto& m = mask[static_cast<size_t>(y) * width + x];
                if (!m)
                {
                    m = 1;
                    ++count;
                }
            }
    }
    if (count == 0)
    {
        if (flags)
            flags->push_back("r_com: no text pixels inside the canvas");
        return 0.0;
    }

    const auto grad = sobel_magnitude(bg);
    double sum = 0.0;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i])
            sum += grad.values[i];
    return 255.0 * sum / static_cast<double>(count);
}

GraphicMetrics graphic_metrics(const LayoutDocument& doc, const RenderResult& render,
                               const LuminanceRaster& background, const AdvanceModel& model)
{
    GraphicMetrics m;
    m.r_ali = r_ali(doc, model);
    m.r_ove = r_ove(doc, model, &m.flags);
    m.r_com = r_com(doc, render, background, &m.flags);
    return m;
}

} // namespace layoutloop
