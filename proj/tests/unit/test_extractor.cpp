#include <doctest.h>

#include "jcascan/extractor.hpp"
#include "rule_fixtures.hpp"

using namespace jcascan;
using namespace jcascan::extract;

TEST_CASE("unescape_entities handles the documented entities") {
    CHECK(unescape_entities("Cipher.getInstance(&quot;AES&quot;)") ==
          "Cipher.getInstance(\"AES\")");
    CHECK(unescape_entities("a &lt; b") == "a < b");
    CHECK(unescape_entities("x &gt;&amp;&#39;&apos; y") == "x >&'' y");
}

TEST_CASE("unescape_entities is single-pass") {
    CHECK(unescape_entities("&amp;quot;") == "&quot;");
    CHECK(unescape_entities("&amp;amp;") == "&amp;");
    // unknown entities pass through
    CHECK(unescape_entities("&copy; 2020 &nbsp;") == "&copy; 2020 &nbsp;");
}

TEST_CASE("second application is the identity when no nested entities remain") {
    for (const auto& fx : fixtures::all()) {
        const std::string once = unescape_entities(fx.code);
        CHECK(unescape_entities(once) == once);
    }
}

namespace {

SourceText html_body(std::string raw) {
    SourceText body;
    body.raw = std::move(raw);
    body.origin = Origin::HtmlPost;
    body.section = Section::Question;
    body.source_id = "42";
    return body;
}

} // namespace

TEST_CASE("extract_code_blocks returns pre/code blocks in order") {
    const auto r = extract_code_blocks(html_body(
        "<p>first</p><pre><code>int a = 1;</code></pre>"
        "<p>then</p><pre class=\"lang-java\"><code>int b = 2;</code></pre>"));
    REQUIRE(r.snippets.size() == 2);
    CHECK(r.snippets[0].text == "int a = 1;");
    CHECK(r.snippets[1].text == "int b = 2;");
    CHECK(r.snippets[0].index == 0);
    CHECK(r.snippets[1].index == 1);
    CHECK(r.diagnostics.empty());
}

TEST_CASE("extract_code_blocks with no code tags yields nothing") {
    const auto r = extract_code_blocks(html_body("<p>just prose about AES</p>"));
    CHECK(r.snippets.empty());
}

TEST_CASE("code block content is entity-unescaped") {
    const auto r = extract_code_blocks(html_body(
        "<pre><code>Cipher.getInstance(&quot;DES&quot;)</code></pre>"));
    REQUIRE(r.snippets.size() == 1);
    // Oracle: the declared unescape operation applied to the raw inner text.
    CHECK(r.snippets[0].text == unescape_entities("Cipher.getInstance(&quot;DES&quot;)"));
    CHECK(r.snippets[0].text == "Cipher.getInstance(\"DES\")");
}

TEST_CASE("short inline code spans are dropped, long ones kept") {
    const auto r = extract_code_blocks(html_body(
        "<p>use <code>AES</code> like <code>Cipher.getInstance(\"AES\")</code></p>"));
    REQUIRE(r.snippets.size() == 1);
    CHECK(r.snippets[0].text == "Cipher.getInstance(\"AES\")");

    Options opts;
    opts.min_inline_code_len = 2;
    const auto r2 = extract_code_blocks(
        html_body("<p>use <code>AES</code> now</p>"), opts);
    REQUIRE(r2.snippets.size() == 1);
    CHECK(r2.snippets[0].text == "AES");
}

TEST_CASE("unbalanced code tags recover to end of body with a diagnostic") {
    const auto r = extract_code_blocks(html_body(
        "<pre><code>Cipher.getInstance(\"DES\");\nint x = 1;"));
    REQUIRE(r.snippets.size() == 1);
    CHECK(r.snippets[0].text.find("int x = 1;") != std::string::npos);
    CHECK(!r.diagnostics.empty());
}

TEST_CASE("a block missing its </pre> does not swallow the next block") {
    const auto r = extract_code_blocks(html_body(
        "<pre><code>int a = 1;</code> <pre><code>int b = 2;</code></pre>"));
    REQUIRE(r.snippets.size() == 2);
    CHECK(r.snippets[0].text == "int a = 1;");
    CHECK(r.snippets[1].text == "int b = 2;");
}

namespace {

SourceText fenced_body(std::string raw) {
    SourceText body;
    body.raw = std::move(raw);
    body.origin = Origin::FencedText;
    body.section = Section::Standalone;
    body.source_id = "answer";
    return body;
}

} // namespace

TEST_CASE("extract_fenced_blocks pulls fenced code") {
    const auto r = extract_fenced_blocks(fenced_body(
        "Sure, use this:\n```java\nCipher c = Cipher.getInstance(\"AES\");\n```\nDone."));
    REQUIRE(r.snippets.size() == 1);
    CHECK(r.snippets[0].text == "Cipher c = Cipher.getInstance(\"AES\");\n");
    CHECK(r.snippets[0].base_line == 2);
}

TEST_CASE("multiple fences extract in order with their source lines") {
    const auto r = extract_fenced_blocks(fenced_body(
        "First:\n```java\nint a = 1;\n```\nSecond:\n```\nint b = 2;\nint c = 3;\n```\n"));
    REQUIRE(r.snippets.size() == 2);
    CHECK(r.snippets[0].text == "int a = 1;\n");
    CHECK(r.snippets[0].index == 0);
    CHECK(r.snippets[0].base_line == 2);
    CHECK(r.snippets[1].text == "int b = 2;\nint c = 3;\n");
    CHECK(r.snippets[1].index == 1);
    CHECK(r.snippets[1].base_line == 6);
}

TEST_CASE("empty text yields no snippets") {
    CHECK(extract_fenced_blocks(fenced_body("")).snippets.empty());
    CHECK(extract_fenced_blocks(fenced_body("  \n \t\n")).snippets.empty());
}

TEST_CASE("fence-less text falls back to the whole body") {
    const std::string text = "int a = 1;\nint b = 2;\nint c = a + b;";
    const auto r = extract_fenced_blocks(fenced_body(text));
    REQUIRE(r.snippets.size() == 1);
    CHECK(r.snippets[0].text == text);
}

TEST_CASE("unterminated fence recovers with a diagnostic") {
    const auto r = extract_fenced_blocks(fenced_body("before\n```\nint a = 1;\nint b = 2;"));
    REQUIRE(r.snippets.size() == 1);
    CHECK(r.snippets[0].text == "int a = 1;\nint b = 2;");
    CHECK(!r.diagnostics.empty());
}

TEST_CASE("offset to line/column mapping is the identity through line_starts") {
    const auto check_snippet = [](const Snippet& sn) {
        REQUIRE(!sn.line_starts.empty());
        CHECK(sn.line_starts.front() == 0);
        for (std::size_t i = 1; i < sn.line_starts.size(); ++i)
            CHECK(sn.line_starts[i] > sn.line_starts[i - 1]);
        for (std::size_t off = 0; off < sn.text.size(); ++off) {
            const LineCol lc = line_col_at(sn, off);
            CHECK(sn.line_starts[lc.line - 1] + (lc.col - 1) == off);
        }
    };
    for (const auto& fx : fixtures::all()) {
        SourceText body;
        body.raw = fx.code;
        body.origin = Origin::PlainFile;
        body.section = Section::Standalone;
        body.source_id = fx.name;
        const auto r = jcascan::extract::extract(body);
        for (const auto& sn : r.snippets) check_snippet(sn);
    }
}
