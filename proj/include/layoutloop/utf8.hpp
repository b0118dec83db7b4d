// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace layoutloop::utf8
{

/// Decodes UTF-8; malformed sequences become U+FFFD instead of failing.
[[nodiscard]] std::u32string decode(std::string_view text);

[[nodiscard]] std::string encode(std::u32string_view text);
[[nodiscard]] std::string encode(char32_t cp);

[[nodiscard]] bool is_whitespace(char32_t cp) noexcept;

} // namespace layoutloop::utf8
