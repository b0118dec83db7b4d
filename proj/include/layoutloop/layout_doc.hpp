// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace layoutloop
{

/// File name the layout prompts use for the background image reference.
inline constexpr std::string_view background_href = "background-image.png";

struct Canvas
{
    int width = 0;
    int height = 0;

    bool operator==(const Canvas&) const = default;
};

struct Color
{
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    /// Rec. 709 luma of the gamma-encoded channels, in [0, 1].
    [[nodiscard]] double luminance() const noexcept
    {
        return (0.2126 * r + 0.7152 * g + 0.0722 * b) / 255.0;
    }

    [[nodiscard]] std::string to_hex() const;

    bool operator==(const Color&) const = default;
};

/// Parses "#rgb", "#rrggbb" or one of the 16 basic named colors.
/// Returns false (leaving `out` untouched) for anything else.
bool parse_color(std::string_view text, Color& out);

enum class TextAnchor
{
    Start,
    Middle,
    End,
};

[[nodiscard]] std::string_view to_string(TextAnchor anchor) noexcept;

struct TextElement
{
    std::string id;
    std::string content; // UTF-8
    double x = 0;
    double y = 0; // baseline
    double font_size = 16;
    TextAnchor anchor = TextAnchor::Start;
    Color fill {};
    int draw_index = 0;
    bool degenerate = false; // set iff content is empty

    bool operator==(const TextElement&) const = default;
};

struct ImageElement
{
    std::string href;
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;
    int draw_index = 0;

    [[nodiscard]] bool is_background() const noexcept { return href == background_href; }

    bool operator==(const ImageElement&) const = default;
};

/// Opaque filled rectangle; occludes earlier text.
struct RectElement
{
    std::string id;
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;
    Color fill {};
    int draw_index = 0;

    bool operator==(const RectElement&) const = default;
};

using Element = std::variant<TextElement, ImageElement, RectElement>;

/// Parsed layout: a canvas plus elements in paint order. Immutable by convention once built.
struct LayoutDocument
{
    Canvas canvas;
    std::vector<Element> elements;

    [[nodiscard]] std::vector<const TextElement*> texts() const;
    [[nodiscard]] const ImageElement* background_image() const;
    [[nodiscard]] bool degenerate() const;

    /// Reassigns draw_index to match position and marks empty texts degenerate.
    void renumber();

    bool operator==(const LayoutDocument&) const = default;
};

struct ParseResult
{
    LayoutDocument document;
    std::vector<std::string> warnings;
};

/// Parses the supported SVG subset (svg, image, text, tspan, rect, g with translate).
/// Throws ParseError on malformed XML and SchemaError on schema violations.
[[nodiscard]] ParseResult parse_svg(std::string_view source);

/// Canonical serialization; parse_svg(serialize_svg(d)).document == d.
[[nodiscard]] std::string serialize_svg(const LayoutDocument& doc);

/// One entry per text element, in draw order.
[[nodiscard]] std::vector<std::string> extract_text(const LayoutDocument& doc);

/// Shortest decimal form that reads back to the same double.
[[nodiscard]] std::string format_number(double value);

} // namespace layoutloop
