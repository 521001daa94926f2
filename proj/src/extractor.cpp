#include "jcascan/extractor.hpp"

#include <algorithm>
#include <cctype>

#include "jcascan/textutil.hpp"

namespace jcascan::extract {

namespace {

struct EntityMap {
    std::string_view name;
    char replacement;
};

constexpr EntityMap ENTITIES[] = {
    {"&quot;", '"'}, {"&amp;", '&'}, {"&lt;", '<'},
    {"&gt;", '>'},   {"&#39;", '\''}, {"&apos;", '\''},
};

std::size_t count_lines_before(std::string_view text, std::size_t offset) {
    return static_cast<std::size_t>(
        std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Case-insensitive search for an HTML tag opening: "<name" followed by a
// non-name character. Returns npos when absent.
std::size_t find_tag_open(std::string_view body, std::string_view name, std::size_t from) {
    for (std::size_t i = from; i + name.size() + 1 < body.size(); ++i) {
        if (body[i] != '<') continue;
        std::size_t j = 0;
        while (j < name.size() &&
               std::tolower(static_cast<unsigned char>(body[i + 1 + j])) == name[j])
            ++j;
        if (j != name.size()) continue;
        const char after = body[i + 1 + name.size()];
        if (after == '>' || std::isspace(static_cast<unsigned char>(after)))
            return i;
    }
    return std::string_view::npos;
}

// End of the tag whose '<' sits at pos; npos when the tag never closes.
std::size_t tag_end(std::string_view body, std::size_t pos) {
    const auto gt = body.find('>', pos);
    return gt == std::string_view::npos ? std::string_view::npos : gt + 1;
}

std::size_t find_close_tag(std::string_view body, std::string_view name, std::size_t from) {
    const std::string needle = "</" + std::string(name);
    for (std::size_t i = from; i + needle.size() <= body.size(); ++i) {
        std::size_t j = 0;
        while (j < needle.size() &&
               std::tolower(static_cast<unsigned char>(body[i + j])) == needle[j])
            ++j;
        if (j == needle.size()) return i;
    }
    return std::string_view::npos;
}

} // namespace

std::string unescape_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] == '&') {
            bool replaced = false;
            for (const auto& e : ENTITIES) {
                if (raw.compare(i, e.name.size(), e.name) == 0) {
                    out.push_back(e.replacement);
                    i += e.name.size();
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
        }
        out.push_back(raw[i]);
        ++i;
    }
    return out;
}

Extraction extract_code_blocks(const SourceText& body, const Options& opts) {
    Extraction result;
    const std::string_view raw = body.raw;
    std::size_t cursor = 0;
    std::size_t index = 0;

    while (cursor < raw.size()) {
        const std::size_t pre_at = find_tag_open(raw, "pre", cursor);
        const std::size_t code_at = find_tag_open(raw, "code", cursor);
        if (pre_at == std::string_view::npos && code_at == std::string_view::npos) break;

        bool in_pre = pre_at != std::string_view::npos &&
                      (code_at == std::string_view::npos || pre_at < code_at);
        std::size_t content_begin, content_end, next_cursor;

        if (in_pre) {
            std::size_t after_pre = tag_end(raw, pre_at);
            if (after_pre == std::string_view::npos) {
                result.diagnostics.push_back(
                    {"unterminated <pre> tag; taking content to end of body",
                     body.source_id, pre_at});
                after_pre = raw.size();
            }
            // Optional nested <code> right inside the <pre>.
            std::size_t inner = after_pre;
            const std::size_t nested_code = find_tag_open(raw, "code", after_pre);
            if (nested_code != std::string_view::npos) {
                const auto between = text::trim(raw.substr(after_pre, nested_code - after_pre));
                if (between.empty()) {
                    const auto e = tag_end(raw, nested_code);
                    inner = e == std::string_view::npos ? raw.size() : e;
                }
            }
            content_begin = inner;
            std::size_t close = find_close_tag(raw, "code", inner);
            const std::size_t close_pre = find_close_tag(raw, "pre", inner);
            if (close == std::string_view::npos ||
                (close_pre != std::string_view::npos && close_pre < close))
                close = close_pre;
            if (close == std::string_view::npos) {
                result.diagnostics.push_back(
                    {"unbalanced <pre><code> block; recovering to end of body",
                     body.source_id, pre_at});
                content_end = raw.size();
                next_cursor = raw.size();
            } else {
                // Resume right after the closing tag; stray </pre> closers are
                // invisible to the opening-tag search.
                content_end = close;
                const std::size_t e = tag_end(raw, close);
                next_cursor = e == std::string_view::npos ? close + 1 : e;
            }
            std::string text = unescape_entities(raw.substr(content_begin, content_end - content_begin));
            if (!text.empty()) {
                result.snippets.push_back(make_snippet(std::move(text), index++, body,
                                                       count_lines_before(raw, content_begin)));
            }
        } else {
            std::size_t after_code = tag_end(raw, code_at);
            if (after_code == std::string_view::npos) {
                result.diagnostics.push_back(
                    {"unterminated <code> tag; taking content to end of body",
                     body.source_id, code_at});
                after_code = raw.size();
            }
            content_begin = after_code;
            const std::size_t close = find_close_tag(raw, "code", after_code);
            if (close == std::string_view::npos) {
                result.diagnostics.push_back(
                    {"unbalanced <code> span; recovering to end of body",
                     body.source_id, code_at});
                content_end = raw.size();
                next_cursor = raw.size();
            } else {
                content_end = close;
                const std::size_t e = tag_end(raw, close);
                next_cursor = e == std::string_view::npos ? close + 1 : e;
            }
            std::string text = unescape_entities(raw.substr(content_begin, content_end - content_begin));
            // Short inline code is prose decoration, not scannable code.
            if (text.size() >= opts.min_inline_code_len) {
                result.snippets.push_back(make_snippet(std::move(text), index++, body,
                                                       count_lines_before(raw, content_begin)));
            }
        }
        cursor = std::max(next_cursor, cursor + 1);
    }
    return result;
}

Extraction extract_fenced_blocks(const SourceText& body) {
    Extraction result;
    const std::string_view raw = body.raw;
    std::size_t cursor = 0;
    std::size_t index = 0;
    bool any_fence = false;

    while (true) {
        const std::size_t open = raw.find("```", cursor);
        if (open == std::string_view::npos) break;
        any_fence = true;
        // Skip the info string on the fence line.
        std::size_t content_begin = raw.find('\n', open + 3);
        if (content_begin == std::string_view::npos) {
            result.diagnostics.push_back(
                {"unterminated code fence; no content follows", body.source_id, open});
            break;
        }
        ++content_begin;
        const std::size_t close = raw.find("```", content_begin);
        std::size_t content_end;
        if (close == std::string_view::npos) {
            result.diagnostics.push_back(
                {"unterminated code fence; taking content to end of text",
                 body.source_id, open});
            content_end = raw.size();
            cursor = raw.size();
        } else {
            content_end = close;
            const std::size_t nl = raw.find('\n', close + 3);
            cursor = nl == std::string_view::npos ? raw.size() : nl + 1;
        }
        std::string text(raw.substr(content_begin, content_end - content_begin));
        if (!text.empty()) {
            result.snippets.push_back(make_snippet(std::move(text), index++, body,
                                                   count_lines_before(raw, content_begin)));
        }
        if (close == std::string_view::npos) break;
    }

    // LLM answers sometimes inline code without fences; treat the whole body
    // as one snippet then.
    if (!any_fence && !text::trim(raw).empty()) {
        result.snippets.push_back(make_snippet(std::string(raw), index++, body, 0));
    }
    return result;
}

Extraction extract(const SourceText& body, const Options& opts) {
    switch (body.origin) {
    case Origin::HtmlPost: return extract_code_blocks(body, opts);
    case Origin::FencedText: return extract_fenced_blocks(body);
    case Origin::PlainFile: {
        Extraction result;
        if (!body.raw.empty())
            result.snippets.push_back(make_snippet(body.raw, 0, body, 0));
        return result;
    }
    }
    return {};
}

} // namespace jcascan::extract
