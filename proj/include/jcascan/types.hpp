#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace jcascan {

// Where a piece of text came from.
enum class Origin { HtmlPost, FencedText, PlainFile };

// Which part of a post the text belongs to.
enum class Section { Question, AcceptedAnswer, OtherAnswer, Standalone };

// Half-open byte range [begin, end) into a snippet.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
    bool adjacent(const Span& o) const { return begin == o.end || o.begin == end; }
};

inline bool operator==(const Span& a, const Span& b) {
    return a.begin == b.begin && a.end == b.end;
}

// Non-fatal problem attached to a result instead of aborting it.
struct Diagnostic {
    std::string message;
    std::string source_id;
    std::size_t where = 0; // offset or row ordinal, depending on producer
};

struct SourceText {
    std::string raw;
    Origin origin = Origin::PlainFile;
    Section section = Section::Standalone;
    std::string source_id;
};

struct LineCol {
    std::size_t line = 1; // 1-based
    std::size_t col = 1;  // 1-based, in bytes
};

// One extracted code block, with enough info to map offsets back to the
// original document.
struct Snippet {
    std::string text;
    std::size_t index = 0;              // ordinal within the source
    std::vector<std::size_t> line_starts; // offsets of line beginnings; [0] == 0
    Origin origin = Origin::PlainFile;
    Section section = Section::Standalone;
    std::string source_id;
    std::size_t base_line = 0; // 0-based line in the source where text starts
};

Snippet make_snippet(std::string text, std::size_t index, const SourceText& src,
                     std::size_t base_line);

// Maps a byte offset inside the snippet text to a 1-based line/column pair
// relative to the snippet itself.
LineCol line_col_at(const Snippet& sn, std::size_t offset);

const char* section_name(Section s);
const char* origin_name(Origin o);

} // namespace jcascan
