// SPDX-License-Identifier: Apache-2.0
#include "xml.hpp"

#include <layoutloop/error.hpp>
#include <layoutloop/utf8.hpp>

#include <charconv>

namespace layoutloop::xml
{

namespace
{

constexpr size_t max_depth = 512;

bool is_name_start(char c)
{
    const auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c)
{
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

class Parser
{
  public:
    explicit Parser(std::string_view src): _src(src) {}

    std::unique_ptr<Node> run()
    {
        skipMisc(true);
        if (atEnd() || peek() != '<')
            fail("expected root element");

        std::unique_ptr<Node> root;
        std::vector<Node*> stack;

        while (true)
        {
            if (stack.empty() && root)
                break;
            if (atEnd())
                fail("unexpected end of input inside <" + stack.back()->name + ">");

            if (peek() == '<')
            {
                if (startsWith("<!--"))
                {
                    skipComment();
                }
                else if (startsWith("<![CDATA["))
                {
                    if (stack.empty())
                        fail("CDATA outside root element");
                    appendText(stack.back(), readCdata());
                }
                else if (startsWith("<?"))
                {
                    skipProcessingInstruction();
                }
                else if (startsWith("</"))
                {
                    _pos += 2;
                    auto name = readName();
                    skipSpace();
                    expect('>');
                    if (stack.empty() || stack.back()->name != name)
                        fail("mismatched closing tag </" + name + ">");
                    stack.pop_back();
                }
                else if (startsWith("<!"))
                {
                    fail("unexpected markup declaration");
                }
                else
                {
                    ++_pos;
                    auto node = std::make_unique<Node>();
                    node->name = readName();
                    const bool selfClosing = readAttributes(*node);
                    Node* raw = node.get();
                    if (stack.empty())
                        root = std::move(node);
                    else
                        stack.back()->children.emplace_back(std::move(node));
                    if (!selfClosing)
                    {
                        if (stack.size() >= max_depth)
                            fail("element nesting too deep");
                        stack.push_back(raw);
                    }
                }
            }
            else
            {
                auto text = readText();
                appendText(stack.back(), std::move(text));
            }
        }

        skipMisc(false);
        if (!atEnd())
            fail("content after root element");
        return root;
    }

  private:
    std::string_view _src;
    size_t _pos = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("xml: " + what + " at offset " + std::to_string(_pos));
    }

    [[nodiscard]] bool atEnd() const { return _pos >= _src.size(); }
    [[nodiscard]] char peek() const { return _src[_pos]; }
    [[nodiscard]] bool startsWith(std::string_view s) const { return _src.substr(_pos, s.size()) == s; }

    void expect(char c)
    {
        if (atEnd() || peek() != c)
            fail(std::string("expected '") + c + "'");
        ++_pos;
    }

    void skipSpace()
    {
        while (!atEnd() && is_space(peek()))
            ++_pos;
    }

    // Prolog / epilog: whitespace, comments, PIs and (prolog only) a DOCTYPE.
    void skipMisc(bool allowDoctype)
    {
        if (allowDoctype && startsWith("\xEF\xBB\xBF"))
            _pos += 3;
        while (true)
        {
            skipSpace();
            if (startsWith("<!--"))
                skipComment();
            else if (startsWith("<?"))
                skipProcessingInstruction();
            else if (allowDoctype && startsWith("<!DOCTYPE"))
                skipDoctype();
            else
                return;
        }
    }

    void skipComment()
    {
        const auto end = _src.find("-->", _pos + 4);
        if (end == std::string_view::npos)
            fail("unterminated comment");
        _pos = end + 3;
    }

    void skipProcessingInstruction()
    {
        const auto end = _src.find("?>", _pos + 2);
        if (end == std::string_view::npos)
            fail("unterminated processing instruction");
        _pos = end + 2;
    }

    void skipDoctype()
    {
        int bracket = 0;
        _pos += 9;
        while (!atEnd())
        {
            const char c = peek();
            ++_pos;
            if (c == '[')
                ++bracket;
            else if (c == ']')
                --bracket;
            else if (c == '>' && bracket <= 0)
                return;
        }
        fail("unterminated DOCTYPE");
    }

    std::string readCdata()
    {
        const auto begin = _pos + 9;
        const auto end = _src.find("]]>", begin);
        if (end == std::string_view::npos)
            fail("unterminated CDATA section");
        _pos = end + 3;
        return std::string(_src.substr(begin, end - begin));
    }

    std::string readName()
    {
        if (atEnd() || !is_name_start(peek()))
            fail("expected name");
        const auto begin = _pos;
        while (!atEnd() && is_name_char(peek()))
            ++_pos;
        return std::string(_src.substr(begin, _pos - begin));
    }

    bool readAttributes(Node& node)
    {
        while (true)
        {
            const auto before = _pos;
            skipSpace();
            if (atEnd())
                fail("unterminated start tag");
            if (peek() == '>')
            {
                ++_pos;
                return false;
            }
            if (startsWith("/>"))
            {
                _pos += 2;
                return true;
            }
            if (_pos == before)
                fail("expected whitespace between attributes");
            auto key = readName();
            skipSpace();
            expect('=');
            skipSpace();
            if (atEnd() || (peek() != '"' && peek() != '\''))
                fail("attribute value must be quoted");
            const char quote = peek();
            ++_pos;
            const auto end = _src.find(quote, _pos);
            if (end == std::string_view::npos)
                fail("unterminated attribute value");
            const auto raw = _src.substr(_pos, end - _pos);
            if (raw.find('<') != std::string_view::npos)
                fail("'<' in attribute value");
            _pos = end + 1;
            if (node.attribute(key) != nullptr)
                fail("duplicate attribute " + key);
            node.attributes.emplace_back(std::move(key), decodeEntities(raw));
        }
    }

    std::string readText()
    {
        const auto end = _src.find('<', _pos);
        const auto stop = end == std::string_view::npos ? _src.size() : end;
        const auto raw = _src.substr(_pos, stop - _pos);
        _pos = stop;
        return decodeEntities(raw);
    }

    std::string decodeEntities(std::string_view raw) const
    {
        std::string out;
        out.reserve(raw.size());
        size_t i = 0;
        while (i < raw.size())
        {
            if (raw[i] != '&')
            {
                out.push_back(raw[i++]);
                continue;
            }
            const auto semi = raw.find(';', i);
            if (semi == std::string_view::npos)
                fail("unterminated entity reference");
            const auto ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "lt")
                out.push_back('<');
            else if (ent == "gt")
                out.push_back('>');
            else if (ent == "amp")
                out.push_back('&');
            else if (ent == "quot")
                out.push_back('"');
            else if (ent == "apos")
                out.push_back('\'');
            else if (ent.size() >= 2 && ent[0] == '#')
            {
                unsigned long cp = 0;
                const bool hex = ent[1] == 'x';
                const auto digits = ent.substr(hex ? 2 : 1);
                const auto [ptr, ec] =
                    std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
                if (digits.empty() || ec != std::errc {} || ptr != digits.data() + digits.size() || cp == 0
                    || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                    fail("invalid character reference");
                out += utf8::encode(static_cast<char32_t>(cp));
            }
            else
                fail("unknown entity &" + std::string(ent) + ";");
            i = semi + 1;
        }
        return out;
    }

    static void appendText(Node* node, std::string text)
    {
        if (!node->children.empty())
        {
            if (auto* s = std::get_if<std::string>(&node->children.back()))
            {
                *s += text;
                return;
            }
        }
        node->children.emplace_back(std::move(text));
    }
};

} // namespace

const std::string* Node::attribute(std::string_view key) const
{
    for (const auto& [k, v]: attributes)
        if (k == key)
            return &v;
    return nullptr;
}

std::unique_ptr<Node> parse(std::string_view source)
{
    return Parser(source).run();
}

std::string escape(std::string_view text, bool attribute)
{
    std::string out;
    out.reserve(text.size());
    for (char c: text)
    {
        switch (c)
        {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (attribute)
                    out += "&quot;";
                else
                    out.push_back(c);
                break;
            case '\n':
                if (attribute)
                    out += "&#10;";
                else
                    out.push_back(c);
                break;
            case '\t':
                if (attribute)
                    out += "&#9;";
                else
                    out.push_back(c);
                break;
            case '\r': out += "&#13;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

} // namespace layoutloop::xml
