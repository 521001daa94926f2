#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "jcascan/types.hpp"

namespace jcascan::rules {

enum class Stage {
    CipherInstantiation,
    KeyInitialization,
    IvInitialization,
    ParameterTransmission,
};

enum class Severity { Insecure, BadPractice };

enum class DetectionMode { Automatic, Candidate };

enum class ConfirmKind {
    None,
    SaltLength,
    IterationCount,
    RandomSource,
    KeystorePassword,
    ConstantValue,
};

// Controls how the identifier captured by a pattern is validated against the
// pattern's keyword list.
enum class KeywordAnchor { FinalToken, AnyToken };

// One detection pattern. The regex dialect is the ECMAScript subset used by
// std::regex: alternation, non-capturing groups, character classes, bounded
// repetition. Capture group 1, when present, holds the identifier that the
// keyword post-filter validates.
struct RulePattern {
    std::string regex;
    Severity severity = Severity::Insecure;
    bool case_insensitive = true;
    std::vector<std::string> ident_keywords; // empty: no identifier filter
    KeywordAnchor anchor = KeywordAnchor::FinalToken;
};

struct Rule {
    std::string id;
    std::vector<int> cwe_ids;
    Stage stage;
    Severity severity = Severity::Insecure; // default for matches
    DetectionMode mode = DetectionMode::Candidate;
    ConfirmKind confirm = ConfirmKind::None;
    std::vector<RulePattern> patterns;
    // Upper-cased alternative token -> severity, for rules whose severity
    // depends on which alternative matched (DESede inside R-01).
    std::map<std::string, Severity> alt_severity;
    std::string description;
    bool enabled = true;
};

struct RuleSet {
    std::vector<Rule> rules;
    std::string version;

    const Rule* find(const std::string& id) const;
    std::size_t active_count() const;
};

// The built-in catalog of the 13 violation rules. Deterministic: two calls
// produce structurally equal sets.
RuleSet builtin_ruleset();

// Severity for a match of `rule`, given the upper-cased alternative token
// (may be empty) and the pattern that produced the match.
Severity severity_for(const Rule& rule, const RulePattern& pattern,
                      const std::string& alt_token_upper);

const char* severity_name(Severity s);
const char* stage_name(Stage s);
const char* confirm_kind_name(ConfirmKind k);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value override document:
//   R-02-b: disabled
//   R-01.severity: bad_practice
// '#' starts a comment. Throws ConfigError on malformed lines (with line
// number) and on unknown rule ids.
struct OverrideConfig {
    struct Entry {
        std::string rule_id;
        bool sets_enabled = false;
        bool enabled = true;
        bool sets_severity = false;
        Severity severity = Severity::Insecure;
    };
    std::vector<Entry> entries;
};

OverrideConfig parse_override_config(const std::string& text);

// Returns a copy of `base` with enable/disable and severity overrides
// applied; `base` is left untouched. Unknown rule ids throw ConfigError.
RuleSet apply_overrides(const RuleSet& base, const OverrideConfig& config);

// Empty iff all invariants hold and every pattern compiles.
std::vector<std::string> validate_ruleset(const RuleSet& rs);

} // namespace jcascan::rules
