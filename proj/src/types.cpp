#include "jcascan/types.hpp"

#include <algorithm>

namespace jcascan {

Snippet make_snippet(std::string text, std::size_t index, const SourceText& src,
                     std::size_t base_line) {
    Snippet sn;
    sn.text = std::move(text);
    sn.index = index;
    sn.origin = src.origin;
    sn.section = src.section;
    sn.source_id = src.source_id;
    sn.base_line = base_line;
    sn.line_starts.push_back(0);
    for (std::size_t i = 0; i < sn.text.size(); ++i)
        if (sn.text[i] == '\n') sn.line_starts.push_back(i + 1);
    return sn;
}

LineCol line_col_at(const Snippet& sn, std::size_t offset) {
    auto it = std::upper_bound(sn.line_starts.begin(), sn.line_starts.end(), offset);
    const std::size_t line_idx = static_cast<std::size_t>(it - sn.line_starts.begin()) - 1;
    return {line_idx + 1, offset - sn.line_starts[line_idx] + 1};
}

const char* section_name(Section s) {
    switch (s) {
    case Section::Question: return "question";
    case Section::AcceptedAnswer: return "accepted_answer";
    case Section::OtherAnswer: return "other_answer";
    case Section::Standalone: return "standalone";
    }
    return "unknown";
}

const char* origin_name(Origin o) {
    switch (o) {
    case Origin::HtmlPost: return "html_post";
    case Origin::FencedText: return "fenced_text";
    case Origin::PlainFile: return "plain_file";
    }
    return "unknown";
}

} // namespace jcascan
