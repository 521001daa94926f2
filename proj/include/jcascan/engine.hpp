#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jcascan/ruleset.hpp"
#include "jcascan/types.hpp"

namespace jcascan::resolve {
struct BindingEnv;
}

namespace jcascan::engine {

// Parsed "algorithm/mode/padding" cipher factory argument. A bare algorithm
// carries no explicit mode, which the JCA provider treats as ECB.
struct Transformation {
    std::string algorithm;  // upper-cased
    bool default_mode = false;
    std::string mode;       // as written; empty when default_mode
    std::optional<std::string> padding;

    bool is_ecb() const;
    bool is_cbc() const;
    bool is_gcm() const;
};

// nullopt on malformed input: empty segments or more than three of them.
std::optional<Transformation> parse_transformation(std::string_view s);

enum class FindingStatus { Confirmed, NeedsReview, Dismissed };

const char* status_name(FindingStatus s);

struct Finding {
    std::string rule_id;
    rules::Severity severity = rules::Severity::Insecure;
    FindingStatus status = FindingStatus::NeedsReview;
    Span span;
    std::string matched_text;
    std::string matched_ident; // identifier captured by the pattern, if any
    std::string evidence;
    Section section = Section::Standalone;
    std::string source_id;
    std::size_t snippet_index = 0;
    LineCol at; // within the source document
};

// One raw regex match of a catalog pattern.
struct PatternMatch {
    Span span;
    std::string group1;
    std::size_t group1_pos = 0;
    bool has_group1 = false;
};

// Applies one catalog pattern to text, returning successive non-overlapping
// matches (leftmost, first-alternative semantics).
std::vector<PatternMatch> find_matches(const rules::RulePattern& p,
                                       std::string_view text);
std::vector<Span> find_match_spans(const rules::RulePattern& p,
                                   std::string_view text);

struct ScanOptions {
    bool strict_context = false; // confirm every constant match
};

struct ScanExtras {
    std::vector<Diagnostic> diagnostics; // skipped sites etc.
    std::vector<std::string> aes_modes;  // ECB/CBC/GCM/other per AES site
    std::vector<int> key_bits;           // observed key sizes
};

struct ScanResult {
    std::vector<Finding> findings;
    std::vector<Diagnostic> diagnostics;
    std::vector<Snippet> snippets;
    std::vector<std::string> aes_modes;
    std::vector<int> key_bits;
};

// Compiles a rule set once and scans any number of snippets with it. A
// Scanner is immutable after construction and safe to share across threads.
class Scanner {
public:
    explicit Scanner(const rules::RuleSet& rs);
    ~Scanner();
    Scanner(Scanner&&) noexcept;
    Scanner& operator=(Scanner&&) noexcept;

    const rules::RuleSet& ruleset() const;

    // Pattern application with findings left unconfirmed (candidate rules
    // report NeedsReview). Pass the section environment to let variable
    // cipher transformations resolve.
    std::vector<Finding> scan_snippet(const Snippet& sn,
                                      const resolve::BindingEnv* env = nullptr,
                                      ScanExtras* extras = nullptr) const;

    // Full pipeline for one source: extract, collect bindings, scan,
    // confirm candidates. Dismissed findings stay in the result; callers
    // decide whether to show them.
    ScanResult scan_text(const SourceText& body, const ScanOptions& opts = {}) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Convenience wrappers that build a throwaway Scanner.
std::vector<Finding> scan_snippet(const Snippet& sn, const rules::RuleSet& rs,
                                  const resolve::BindingEnv* env = nullptr);
ScanResult scan_text(const SourceText& body, const rules::RuleSet& rs,
                     const ScanOptions& opts = {});

// Tokens whose absence guarantees an empty scan; used as a cheap gate before
// any regex work.
const std::vector<std::string>& fast_path_tokens();
bool fast_path_hit(std::string_view text);

} // namespace jcascan::engine
