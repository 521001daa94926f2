#pragma once

#include <string>
#include <vector>

#include "jcascan/types.hpp"

namespace jcascan::extract {

// Single-pass HTML entity unescaping: &quot; &amp; &lt; &gt; &#39; &apos;
// Unknown entities pass through verbatim; replacements are never rescanned,
// so "&amp;quot;" becomes "&quot;" and not a bare quote.
std::string unescape_entities(std::string_view raw);

struct Options {
    // Inline <code> spans shorter than this many characters are dropped as
    // prose noise; <pre><code> blocks are always kept.
    std::size_t min_inline_code_len = 16;
};

struct Extraction {
    std::vector<Snippet> snippets;
    std::vector<Diagnostic> diagnostics;
};

// Pulls <pre><code>..</code></pre> blocks and standalone <code>..</code>
// spans out of a post body, entity-unescaped, in document order. Unbalanced
// tags recover to end-of-body with a diagnostic.
Extraction extract_code_blocks(const SourceText& body, const Options& opts = {});

// Pulls triple-backtick fenced blocks out of answer text. With no fences the
// whole body is returned as one snippet. An unterminated fence yields its
// content to end-of-text plus a diagnostic.
Extraction extract_fenced_blocks(const SourceText& body);

// Dispatch on body.origin; PlainFile yields the whole text as one snippet.
Extraction extract(const SourceText& body, const Options& opts = {});

} // namespace jcascan::extract
