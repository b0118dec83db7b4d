// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/layout_doc.hpp>
#include <layoutloop/utf8.hpp>

#include "xml.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <set>

namespace layoutloop
{

namespace
{

struct NamedColor
{
    std::string_view name;
    Color color;
};

constexpr std::array<NamedColor, 16> named_colors { {
    { "black", { 0, 0, 0 } },
    { "silver", { 192, 192, 192 } },
    { "gray", { 128, 128, 128 } },
    { "white", { 255, 255, 255 } },
    { "maroon", { 128, 0, 0 } },
    { "red", { 255, 0, 0 } },
    { "purple", { 128, 0, 128 } },
    { "fuchsia", { 255, 0, 255 } },
    { "green", { 0, 128, 0 } },
    { "lime", { 0, 255, 0 } },
    { "olive", { 128, 128, 0 } },
    { "yellow", { 255, 255, 0 } },
    { "navy", { 0, 0, 128 } },
    { "blue", { 0, 0, 255 } },
    { "teal", { 0, 128, 128 } },
    { "aqua", { 0, 255, 255 } },
} };

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view local_name(std::string_view name)
{
    const auto colon = name.rfind(':');
    return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

// Presentation state inherited from <g>/<text> down to runs.
struct Style
{
    double font_size = 16;
    TextAnchor anchor = TextAnchor::Start;
    Color fill {};
    bool preserve_space = false;
    double tx = 0;
    double ty = 0;
};

class SvgReader
{
  public:
    explicit SvgReader(std::vector<std::string>& warnings): _warnings(warnings) {}

    LayoutDocument read(const xml::Node& root)
    {
        if (local_name(root.name) != "svg")
            throw SchemaError("root element must be <svg>, got <" + root.name + ">");
        _doc.canvas.width = canvasDimension(root, "width");
        _doc.canvas.height = canvasDimension(root, "height");

        Style style;
        applyPresentation(root, style);
        walkChildren(root, style);

        dedupeIds();
        _doc.renumber();
        return std::move(_doc);
    }

  private:
    std::vector<std::string>& _warnings;
    LayoutDocument _doc;
    int _textCount = 0;
    int _rectCount = 0;

    void warn(std::string message) { _warnings.push_back(std::move(message)); }

    int canvasDimension(const xml::Node& root, const char* key)
    {
        const auto* raw = root.attribute(key);
        if (raw == nullptr)
            throw SchemaError(std::string("root <svg> is missing ") + key);
        double value = 0;
        std::string_view unit;
        if (!parseNumber(*raw, value, unit) || !(unit.empty() || unit == "px"))
            throw SchemaError(std::string("invalid canvas ") + key + " '" + *raw + "'");
        const double rounded = std::round(value);
        if (rounded < 1 || rounded > 1 << 20)
            throw SchemaError(std::string("canvas ") + key + " must be a positive pixel count");
        if (rounded != value)
            warn(std::string("canvas ") + key + " rounded to integer pixels");
        return static_cast<int>(rounded);
    }

    // Number with optional unit suffix. Accepts a leading list item ("10 20" -> 10).
    bool parseNumber(std::string_view raw, double& value, std::string_view& unit)
    {
        auto s = trim(raw);
        if (s.empty())
            return false;
        if (s.front() == '+')
            s.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc {} || !std::isfinite(value))
            return false;
        auto rest = s.substr(static_cast<size_t>(ptr - s.data()));
        const auto sep = rest.find_first_of(" ,\t\n");
        if (sep != std::string_view::npos)
        {
            warn("coordinate list '" + std::string(raw) + "' reduced to its first value");
            rest = rest.substr(0, sep);
        }
        unit = rest;
        return true;
    }

    // Resolves a length attribute; percentages are taken against `reference`.
    double length(const xml::Node& node, const char* key, double fallback, double reference)
    {
        const auto* raw = node.attribute(key);
        if (raw == nullptr)
            return fallback;
        double value = 0;
        std::string_view unit;
        if (!parseNumber(*raw, value, unit))
            throw SchemaError("invalid number '" + *raw + "' in " + key + " of <" + node.name + ">");
        if (unit == "%")
            return value * reference / 100.0;
        if (!unit.empty() && unit != "px")
            warn("unit '" + std::string(unit) + "' treated as px in " + key);
        return value;
    }

    void applyTransform(const xml::Node& node, Style& style)
    {
        const auto* raw = node.attribute("transform");
        if (raw == nullptr)
            return;
        std::string_view rest = trim(*raw);
        while (!rest.empty())
        {
            if (rest.substr(0, 10) != "translate(")
            {
                warn("unsupported transform '" + *raw + "' ignored");
                return;
            }
            const auto close = rest.find(')');
            if (close == std::string_view::npos)
            {
                warn("unterminated transform '" + *raw + "' ignored");
                return;
            }
            auto args = rest.substr(10, close - 10);
            std::array<double, 2> v { 0, 0 };
            int count = 0;
            while (!(args = trim(args)).empty() && count < 2)
            {
                if (args.front() == ',')
                {
                    args.remove_prefix(1);
                    continue;
                }
                const auto [ptr, ec] = std::from_chars(args.data(), args.data() + args.size(), v[count]);
                if (ec != std::errc {} || !std::isfinite(v[count]))
                {
                    warn("malformed translate '" + *raw + "' ignored");
                    return;
                }
                args.remove_prefix(static_cast<size_t>(ptr - args.data()));
                ++count;
            }
            if (count == 0)
            {
                warn("empty translate ignored");
                return;
            }
            style.tx += v[0];
            style.ty += v[1];
            rest = trim(rest.substr(close + 1));
            if (!rest.empty() && rest.front() == ',')
                rest = trim(rest.substr(1));
        }
    }

    void applyProperty(std::string_view key, std::string_view value, const xml::Node& node, Style& style)
    {
        value = trim(value);
        if (key == "font-size")
        {
            double size = 0;
            std::string_view unit;
            if (!parseNumber(value, size, unit))
                throw SchemaError("invalid font-size '" + std::string(value) + "' on <" + node.name + ">");
            if (unit == "%")
                size = style.font_size * size / 100.0;
            else if (!unit.empty() && unit != "px")
                warn("font-size unit '" + std::string(unit) + "' treated as px");
            if (!(size > 0))
                throw SchemaError("font-size must be positive on <" + node.name + ">");
            style.font_size = size;
        }
        else if (key == "text-anchor")
        {
            if (value == "start")
                style.anchor = TextAnchor::Start;
            else if (value == "middle")
                style.anchor = TextAnchor::Middle;
            else if (value == "end")
                style.anchor = TextAnchor::End;
            else
                warn("unknown text-anchor '" + std::string(value) + "' ignored");
        }
        else if (key == "fill")
        {
            Color c;
            if (parse_color(value, c))
                style.fill = c;
            else
            {
                warn("unknown color '" + std::string(value) + "' replaced by black");
                style.fill = Color {};
            }
        }
        else if (key == "xml:space")
        {
            style.preserve_space = value == "preserve";
        }
    }

    void applyPresentation(const xml::Node& node, Style& style)
    {
        for (const char* key: { "font-size", "text-anchor", "fill", "xml:space" })
            if (const auto* v = node.attribute(key))
                applyProperty(key, *v, node, style);

        if (const auto* css = node.attribute("style"))
        {
            std::string_view rest = *css;
            while (!rest.empty())
            {
                const auto semi = rest.find(';');
                const auto decl = rest.substr(0, semi);
                const auto colon = decl.find(':');
                if (colon != std::string_view::npos)
                {
                    const auto key = trim(decl.substr(0, colon));
                    if (key == "font-size" || key == "text-anchor" || key == "fill")
                        applyProperty(key, decl.substr(colon + 1), node, style);
                }
                if (semi == std::string_view::npos)
                    break;
                rest.remove_prefix(semi + 1);
            }
        }
        applyTransform(node, style);
    }

    void walkChildren(const xml::Node& node, const Style& style)
    {
        for (const auto& child: node.children)
        {
            if (const auto* text = std::get_if<std::string>(&child))
            {
                if (!trim(*text).empty())
                    warn("character data outside <text> ignored");
                continue;
            }
            walkElement(*std::get<std::unique_ptr<xml::Node>>(child), style);
        }
    }

    void walkElement(const xml::Node& node, const Style& inherited)
    {
        const auto name = local_name(node.name);
        Style style = inherited;
        if (name == "g")
        {
            applyPresentation(node, style);
            walkChildren(node, style);
        }
        else if (name == "text")
        {
            applyPresentation(node, style);
            readText(node, style);
        }
        else if (name == "image")
        {
            applyTransform(node, style);
            readImage(node, style);
        }
        else if (name == "rect")
        {
            applyPresentation(node, style);
            readRect(node, style);
        }
        else
        {
            warn("unsupported element <" + node.name + "> ignored");
        }
    }

    void readImage(const xml::Node& node, const Style& style)
    {
        const auto* href = node.attribute("href");
        if (href == nullptr)
            href = node.attribute("xlink:href");
        ImageElement img;
        img.href = href ? *href : std::string {};
        img.x = style.tx + length(node, "x", 0, _doc.canvas.width);
        img.y = style.ty + length(node, "y", 0, _doc.canvas.height);
        img.w = length(node, "width", _doc.canvas.width, _doc.canvas.width);
        img.h = length(node, "height", _doc.canvas.height, _doc.canvas.height);
        if (img.w < 0 || img.h < 0)
            throw SchemaError("negative <image> size");
        if (img.is_background() && _doc.background_image() != nullptr)
        {
            warn("duplicate background image reference dropped");
            return;
        }
        _doc.elements.emplace_back(std::move(img));
    }

    void readRect(const xml::Node& node, const Style& style)
    {
        const auto* fill = node.attribute("fill");
        if (fill != nullptr && trim(*fill) == "none")
        {
            warn("unfilled <rect> ignored");
            return;
        }
        RectElement rect;
        const auto* id = node.attribute("id");
        rect.id = id ? *id : "r" + std::to_string(_rectCount);
        ++_rectCount;
        rect.x = style.tx + length(node, "x", 0, _doc.canvas.width);
        rect.y = style.ty + length(node, "y", 0, _doc.canvas.height);
        rect.w = length(node, "width", 0, _doc.canvas.width);
        rect.h = length(node, "height", 0, _doc.canvas.height);
        if (rect.w < 0 || rect.h < 0)
            throw SchemaError("negative <rect> size");
        rect.fill = style.fill;
        _doc.elements.emplace_back(std::move(rect));
    }

    std::string normalizeSpace(std::string_view raw, bool preserve) const
    {
        if (preserve)
            return std::string(raw);
        std::string out;
        bool pendingSpace = false;
        for (char c: raw)
        {
            if (c == '\n' || c == '\r')
                continue;
            if (c == ' ' || c == '\t')
            {
                pendingSpace = !out.empty();
                continue;
            }
            if (pendingSpace)
                out.push_back(' ');
            pendingSpace = false;
            out.push_back(c);
        }
        return out;
    }

    void readText(const xml::Node& node, const Style& style)
    {
        const auto* id = node.attribute("id");
        const std::string base = id ? *id : "t" + std::to_string(_textCount);
        ++_textCount;

        const double x = style.tx + length(node, "x", 0, _doc.canvas.width) + length(node, "dx", 0, _doc.canvas.width);
        const double y =
            style.ty + length(node, "y", 0, _doc.canvas.height) + length(node, "dy", 0, _doc.canvas.height);
        int runIndex = 0;
        readRuns(node, style, x, y, base, true, runIndex);
    }

    static bool hasElementChild(const xml::Node& node)
    {
        for (const auto& child: node.children)
            if (std::holds_alternative<std::unique_ptr<xml::Node>>(child))
                return true;
        return false;
    }

    // Emits one TextElement per tspan (recursively) or per text chunk.
    void readRuns(const xml::Node& node, const Style& style, double x, double y, const std::string& base,
                  bool isTextRoot, int& runIndex)
    {
        if (!hasElementChild(node))
        {
            std::string content;
            for (const auto& child: node.children)
                content += std::get<std::string>(child);
            std::string runId;
            if (isTextRoot)
                runId = base;
            else if (const auto* own = node.attribute("id"))
                runId = *own;
            else
                runId = base + "." + std::to_string(runIndex);
            ++runIndex;
            emitRun(std::move(runId), normalizeSpace(content, style.preserve_space), x, y, style);
            return;
        }

        for (const auto& child: node.children)
        {
            if (const auto* chunk = std::get_if<std::string>(&child))
            {
                auto content = normalizeSpace(*chunk, style.preserve_space);
                if (trim(content).empty())
                    continue;
                warn("mixed text content placed at the enclosing anchor");
                emitRun(base + "." + std::to_string(runIndex), std::move(content), x, y, style);
                ++runIndex;
                continue;
            }
            const auto& sub = *std::get<std::unique_ptr<xml::Node>>(child);
            if (local_name(sub.name) != "tspan")
            {
                warn("unsupported element <" + sub.name + "> inside text ignored");
                continue;
            }
            Style subStyle = style;
            subStyle.tx = 0;
            subStyle.ty = 0;
            applyPresentation(sub, subStyle);
            const double sx = (sub.attribute("x") ? style.tx + length(sub, "x", 0, _doc.canvas.width) : x)
                              + length(sub, "dx", 0, _doc.canvas.width) + subStyle.tx;
            const double sy = (sub.attribute("y") ? style.ty + length(sub, "y", 0, _doc.canvas.height) : y)
                              + length(sub, "dy", 0, _doc.canvas.height) + subStyle.ty;
            subStyle.tx = style.tx;
            subStyle.ty = style.ty;
            readRuns(sub, subStyle, sx, sy, base, false, runIndex);
        }
    }

    void emitRun(std::string id, std::string content, double x, double y, const Style& style)
    {
        TextElement t;
        t.id = std::move(id);
        t.content = utf8::encode(utf8::decode(content));
        t.x = x;
        t.y = y;
        t.font_size = style.font_size;
        t.anchor = style.anchor;
        t.fill = style.fill;
        _doc.elements.emplace_back(std::move(t));
    }

    void dedupeIds()
    {
        std::set<std::string> seen;
        for (auto& el: _doc.elements)
        {
            std::string* id = nullptr;
            if (auto* t = std::get_if<TextElement>(&el))
                id = &t->id;
            else if (auto* r = std::get_if<RectElement>(&el))
                id = &r->id;
            if (id == nullptr)
                continue;
            if (seen.insert(*id).second)
                continue;
            int k = 1;
            while (!seen.insert(*id + "~" + std::to_string(k)).second)
                ++k;
            warn("duplicate id '" + *id + "' renamed");
            *id += "~" + std::to_string(k);
        }
    }
};

// SVG default whitespace handling leaves these strings unchanged.
bool survives_default_space(std::string_view s)
{
    if (s.empty())
        return true;
    if (s.front() == ' ' || s.back() == ' ')
        return false;
    for (size_t i = 0; i < s.size(); ++i)
    {
        if (s[i] == '\n' || s[i] == '\r' || s[i] == '\t')
            return false;
        if (s[i] == ' ' && i + 1 < s.size() && s[i + 1] == ' ')
            return false;
    }
    return true;
}

} // namespace

std::string Color::to_hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "#";
    for (auto c: { r, g, b })
    {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xF]);
    }
    return out;
}

bool parse_color(std::string_view text, Color& out)
{
    text = trim(text);
    if (!text.empty() && text.front() == '#')
    {
        const auto hex = text.substr(1);
        if (hex.size() != 3 && hex.size() != 6)
            return false;
        std::array<int, 6> v {};
        for (size_t i = 0; i < hex.size(); ++i)
            if ((v[i] = hex_value(hex[i])) < 0)
                return false;
        if (hex.size() == 3)
            out = { static_cast<std::uint8_t>(v[0] * 17), static_cast<std::uint8_t>(v[1] * 17),
                    static_cast<std::uint8_t>(v[2] * 17) };
        else
            out = { static_cast<std::uint8_t>(v[0] * 16 + v[1]), static_cast<std::uint8_t>(v[2] * 16 + v[3]),
                    static_cast<std::uint8_t>(v[4] * 16 + v[5]) };
        return true;
    }
    for (const auto& named: named_colors)
    {
        if (named.name == text)
        {
            out = named.color;
            return true;
        }
    }
    return false;
}

std::string_view to_string(TextAnchor anchor) noexcept
{
    switch (anchor)
    {
        case TextAnchor::Middle: return "middle";
        case TextAnchor::End: return "end";
        case TextAnchor::Start: break;
    }
    return "start";
}

std::vector<const TextElement*> LayoutDocument::texts() const
{
    std::vector<const TextElement*> out;
    for (const auto& el: elements)
        if (const auto* t = std::get_if<TextElement>(&el))
            out.push_back(t);
    return out;
}

const ImageElement* LayoutDocument::background_image() const
{
    for (const auto& el: elements)
        if (const auto* img = std::get_if<ImageElement>(&el); img && img->is_background())
            return img;
    return nullptr;
}

bool LayoutDocument::degenerate() const
{
    return texts().empty();
}

void LayoutDocument::renumber()
{
    int index = 0;
    for (auto& el: elements)
    {
        std::visit([&](auto& e) { e.draw_index = index; }, el);
        if (auto* t = std::get_if<TextElement>(&el))
            t->degenerate = t->content.empty();
        ++index;
    }
}

ParseResult parse_svg(std::string_view source)
{
    ParseResult result;
    const auto root = xml::parse(source);
    result.document = SvgReader(result.warnings).read(*root);
    return result;
}

std::string format_number(double value)
{
    if (value == 0)
        return "0";
    std::array<char, 64> buf {};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string serialize_svg(const LayoutDocument& doc)
{
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(doc.canvas.width)
                      + "\" height=\"" + std::to_string(doc.canvas.height) + "\"";
    if (doc.elements.empty())
        return out + "/>\n";
    out += ">\n";

    const auto attr = [](std::string_view key, std::string_view value) {
        return " " + std::string(key) + "=\"" + xml::escape(value, true) + "\"";
    };

    for (const auto& el: doc.elements)
    {
        if (const auto* t = std::get_if<TextElement>(&el))
        {
            out += "  <text";
            out += attr("id", t->id);
            out += attr("x", format_number(t->x));
            out += attr("y", format_number(t->y));
            out += attr("font-size", format_number(t->font_size));
            out += attr("text-anchor", to_string(t->anchor));
            out += attr("fill", t->fill.to_hex());
            if (!survives_default_space(t->content))
                out += attr("xml:space", "preserve");
            out += ">" + xml::escape(t->content, false) + "</text>\n";
        }
        else if (const auto* img = std::get_if<ImageElement>(&el))
        {
            out += "  <image";
            out += attr("href", img->href);
            out += attr("x", format_number(img->x));
            out += attr("y", format_number(img->y));
            out += attr("width", format_number(img->w));
            out += attr("height", format_number(img->h));
            out += "/>\n";
        }
        else if (const auto* r = std::get_if<RectElement>(&el))
        {
            out += "  <rect";
            out += attr("id", r->id);
            out += attr("x", format_number(r->x));
            out += attr("y", format_number(r->y));
            out += attr("width", format_number(r->w));
            out += attr("height", format_number(r->h));
            out += attr("fill", r->fill.to_hex());
            out += "/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

std::vector<std::string> extract_text(const LayoutDocument& doc)
{
    std::vector<std::string> out;
    for (const auto* t: doc.texts())
        out.push_back(t->content);
    return out;
}

} // namespace layoutloop
