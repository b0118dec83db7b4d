// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace layoutloop::xml
{

struct Node;

/// Child of an element: nested element or character data (entities decoded).
using Child = std::variant<std::unique_ptr<Node>, std::string>;

struct Node
{
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Child> children;

    [[nodiscard]] const std::string* attribute(std::string_view key) const;
};

/// Non-validating parser for well-formed XML documents. Throws ParseError.
[[nodiscard]] std::unique_ptr<Node> parse(std::string_view source);

/// Escapes &, <, > and (for attributes) quotes and control whitespace.
[[nodiscard]] std::string escape(std::string_view text, bool attribute);

} // namespace layoutloop::xml
