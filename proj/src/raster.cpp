// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/raster.hpp>
#include <layoutloop/utf8.hpp>

#include <cmath>

namespace layoutloop
{

namespace
{

struct PixelSpan
{
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    [[nodiscard]] bool empty() const { return x1 <= x0 || y1 <= y0; }
};

// Pixels whose centers fall inside r, clamped to the raster.
PixelSpan covered_pixels(const Rect& r, int width, int height)
{
    const auto lo = [](double v, int limit) {
        return std::clamp(static_cast<int>(std::ceil(v - 0.5)), 0, limit);
    };
    return { lo(r.x0, width), lo(r.y0, height), lo(r.x1, width), lo(r.y1, height) };
}

void fill_rect(LuminanceRaster& raster, const Rect& r, double value)
{
    const auto span = covered_pixels(r, raster.width, raster.height);
    for (int y = span.y0; y < span.y1; ++y)
        for (int x = span.x0; x < span.x1; ++x)
            raster.at(x, y) = value;
}

double mean_under(const LuminanceRaster& raster, const Rect& r, bool& any)
{
    const auto span = covered_pixels(r, raster.width, raster.height);
    any = !span.empty();
    if (span.empty())
    {
        const double cx = r.center_x();
        const double cy = r.center_y();
        if (cx >= 0 && cy >= 0 && cx < raster.width && cy < raster.height)
        {
            any = true;
            return raster.at(static_cast<int>(cx), static_cast<int>(cy));
        }
        return 0.0;
    }
    double sum = 0.0;
    for (int y = span.y0; y < span.y1; ++y)
        for (int x = span.x0; x < span.x1; ++x)
            sum += raster.at(x, y);
    return sum / (static_cast<double>(span.x1 - span.x0) * (span.y1 - span.y0));
}

void paint_image(LuminanceRaster& raster, const ImageElement& img, const LuminanceRaster& background)
{
    if (img.w <= 0 || img.h <= 0)
        return;
    const Rect box { img.x, img.y, img.x + img.w, img.y + img.h };
    const auto span = covered_pixels(box, raster.width, raster.height);
    for (int y = span.y0; y < span.y1; ++y)
    {
        const double v = (y + 0.5 - img.y) / img.h;
        const int sy = std::clamp(static_cast<int>(v * background.height), 0, background.height - 1);
        for (int x = span.x0; x < span.x1; ++x)
        {
            const double u = (x + 0.5 - img.x) / img.w;
            const int sx = std::clamp(static_cast<int>(u * background.width), 0, background.width - 1);
            raster.at(x, y) = background.at(sx, sy);
        }
    }
}

Rect element_box(const Element& el)
{
    if (const auto* img = std::get_if<ImageElement>(&el))
        return { img->x, img->y, img->x + img->w, img->y + img->h };
    if (const auto* r = std::get_if<RectElement>(&el))
        return { r->x, r->y, r->x + r->w, r->y + r->h };
    return {};
}

} // namespace

LuminanceRaster LuminanceRaster::resized(int w, int h) const
{
    LuminanceRaster out(w, h);
    if (width <= 0 || height <= 0)
        return out;
    for (int y = 0; y < h; ++y)
    {
        const int sy = std::min(height - 1, static_cast<int>((y + 0.5) * height / h));
        for (int x = 0; x < w; ++x)
        {
            const int sx = std::min(width - 1, static_cast<int>((x + 0.5) * width / w));
            out.at(x, y) = at(sx, sy);
        }
    }
    return out;
}

bool is_wide_character(char32_t c) noexcept
{
    return (c >= 0x1100 && c <= 0x115F) || (c >= 0x2E80 && c <= 0xA4CF) || (c >= 0xAC00 && c <= 0xD7A3)
           || (c >= 0xF900 && c <= 0xFAFF) || (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF00 && c <= 0xFF60)
           || (c >= 0xFFE0 && c <= 0xFFE6) || (c >= 0x20000 && c <= 0x3FFFD);
}

double AdvanceModel::factor(char32_t c) const noexcept
{
    if (c == 0x3000 || is_wide_character(c))
        return wide;
    if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r')
        return space;
    return latin;
}

Rect text_bbox(const TextElement& text, const AdvanceModel& model)
{
    double width = 0.0;
    for (char32_t c: utf8::decode(text.content))
        width += model.advance(c, text.font_size);
    double start = text.x;
    if (text.anchor == TextAnchor::Middle)
        start -= width / 2;
    else if (text.anchor == TextAnchor::End)
        start -= width;
    return { start, text.y - text.font_size, start + width, text.y };
}

std::vector<GlyphBox> layout_glyphs(const LayoutDocument& doc, const AdvanceModel& model)
{
    std::vector<GlyphBox> glyphs;
    for (size_t index = 0; index < doc.elements.size(); ++index)
    {
        const auto* text = std::get_if<TextElement>(&doc.elements[index]);
        if (text == nullptr)
            continue;
        const Rect run = text_bbox(*text, model);
        double pen = run.x0;
        for (char32_t c: utf8::decode(text->content))
        {
            GlyphBox g;
            g.character = c;
            g.element_id = text->id;
            g.draw_index = static_cast<int>(index);
            g.font_size = text->font_size;
            const double advance = model.advance(c, text->font_size);
            g.bbox = { pen, run.y0, pen + advance, run.y1 };
            pen += advance;
            glyphs.push_back(std::move(g));
        }
    }
    return glyphs;
}

RenderResult render(const LayoutDocument& doc, const LuminanceRaster& background, const AdvanceModel& model)
{
    RenderResult result;
    const int width = doc.canvas.width;
    const int height = doc.canvas.height;

    LuminanceRaster bg = background;
    if (bg.width != width || bg.height != height)
    {
        result.warnings.push_back("background " + std::to_string(bg.width) + "x" + std::to_string(bg.height)
                                  + " resampled to canvas " + std::to_string(width) + "x"
                                  + std::to_string(height));
        bg = bg.resized(width, height);
    }

    if (doc.background_image() == nullptr)
        result.warnings.push_back("document does not reference the background image");

    result.raster = LuminanceRaster(width, height, 1.0);
    result.glyphs = layout_glyphs(doc, model);

    // Opaque boxes in paint order, tagged with their draw index.
    struct Occluder
    {
        Rect box;
        int draw_index;
        size_t glyph; // position in result.glyphs, or npos
    };
    std::vector<Occluder> occluders;

    size_t next_glyph = 0;
    for (size_t index = 0; index < doc.elements.size(); ++index)
    {
        const auto& el = doc.elements[index];
        const int order = static_cast<int>(index);
        if (const auto* text = std::get_if<TextElement>(&el))
        {
            const size_t first = next_glyph;
            while (next_glyph < result.glyphs.size() && result.glyphs[next_glyph].draw_index == order)
                ++next_glyph;

            const double ink = text->fill.luminance();
            for (size_t i = first; i < next_glyph; ++i)
            {
                bool any = false;
                const double patch = mean_under(result.raster, result.glyphs[i].bbox, any);
                result.glyphs[i].contrast = any ? std::abs(patch - ink) : 0.0;
            }
            Rect bounds { text->x, text->y - text->font_size, text->x, text->y };
            if (next_glyph > first)
                bounds = result.glyphs[first].bbox;
            for (size_t i = first; i < next_glyph; ++i)
            {
                fill_rect(result.raster, result.glyphs[i].bbox, ink);
                bounds = bounding_union(bounds, result.glyphs[i].bbox);
                occluders.push_back({ result.glyphs[i].bbox, order, i });
            }
            result.element_bboxes[text->id] = bounds;
            result.text_ids.push_back(text->id);
        }
        else if (const auto* img = std::get_if<ImageElement>(&el))
        {
            if (img->is_background())
            {
                paint_image(result.raster, *img, bg);
            }
            else
            {
                result.warnings.push_back("image '" + img->href + "' has no pixel data; painted mid-gray");
                fill_rect(result.raster, element_box(el), 0.5);
            }
            occluders.push_back({ element_box(el), order, std::string::npos });
        }
        else if (const auto* rect = std::get_if<RectElement>(&el))
        {
            fill_rect(result.raster, element_box(el), rect->fill.luminance());
            occluders.push_back({ element_box(el), order, std::string::npos });
        }
    }

    const Rect canvas { 0, 0, static_cast<double>(width), static_cast<double>(height) };
    std::vector<Rect> covering;
    for (size_t i = 0; i < result.glyphs.size(); ++i)
    {
        auto& g = result.glyphs[i];
        const double area = g.bbox.area();
        if (area <= 0)
        {
            g.visible_fraction = 0;
            g.occluded_fraction = 0;
            g.clipped_fraction = 1;
            continue;
        }
        const Rect inside = intersect(g.bbox, canvas);
        const double inside_area = inside.area();

        // Later elements, and later glyphs of the same element, paint over this one.
        covering.clear();
        for (const auto& o: occluders)
        {
            const bool later = o.draw_index > g.draw_index
                               || (o.draw_index == g.draw_index && o.glyph != std::string::npos && o.glyph > i);
            if (!later)
                continue;
            const Rect overlap = intersect(o.box, inside);
            if (!overlap.empty())
                covering.push_back(overlap);
        }
        const double occluded_area = union_area(covering);
        g.clipped_fraction = (area - inside_area) / area;
        g.occluded_fraction = occluded_area / area;
        g.visible_fraction = std::max(0.0, (inside_area - occluded_area) / area);
    }
    return result;
}

double in_canvas_fraction(const RenderResult& result)
{
    double total = 0.0;
    double inside = 0.0;
    const Rect canvas { 0, 0, static_cast<double>(result.raster.width), static_cast<double>(result.raster.height) };
    for (const auto& g: result.glyphs)
    {
        total += g.bbox.area();
        inside += intersect(g.bbox, canvas).area();
    }
    return total > 0 ? inside / total : 0.0;
}

} // namespace layoutloop
