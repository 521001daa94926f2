#include "jcascan/engine.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "jcascan/extractor.hpp"
#include "jcascan/resolver.hpp"
#include "jcascan/textutil.hpp"

namespace jcascan::engine {

namespace text = jcascan::text;
using rules::DetectionMode;
using rules::Rule;
using rules::RulePattern;
using rules::RuleSet;
using rules::Severity;

bool Transformation::is_ecb() const {
    return default_mode || text::to_lower(mode) == "ecb";
}
bool Transformation::is_cbc() const { return text::to_lower(mode) == "cbc"; }
bool Transformation::is_gcm() const { return text::to_lower(mode) == "gcm"; }

std::optional<Transformation> parse_transformation(std::string_view s) {
    std::vector<std::string> segments;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '/') {
            segments.emplace_back(text::trim(s.substr(begin, i - begin)));
            begin = i + 1;
        }
    }
    if (segments.empty() || segments.size() > 3) return std::nullopt;
    for (const auto& seg : segments)
        if (seg.empty()) return std::nullopt;

    Transformation t;
    t.algorithm = segments[0];
    std::transform(t.algorithm.begin(), t.algorithm.end(), t.algorithm.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (segments.size() == 1) {
        t.default_mode = true;
    } else {
        t.mode = segments[1];
        if (segments.size() == 3) t.padding = segments[2];
    }
    return t;
}

const char* status_name(FindingStatus s) {
    switch (s) {
    case FindingStatus::Confirmed: return "confirmed";
    case FindingStatus::NeedsReview: return "needs_review";
    case FindingStatus::Dismissed: return "dismissed";
    }
    return "unknown";
}

namespace {

std::regex compile(const RulePattern& p) {
    auto flags = std::regex::ECMAScript;
    if (p.case_insensitive) flags |= std::regex::icase;
    return std::regex(p.regex, flags);
}

std::vector<PatternMatch> run_regex(const std::regex& re, std::string_view sv) {
    std::vector<PatternMatch> out;
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    for (std::cregex_iterator it(first, last, re), end; it != end; ++it) {
        const auto& m = *it;
        PatternMatch pm;
        pm.span.begin = static_cast<std::size_t>(m.position(0));
        pm.span.end = pm.span.begin + static_cast<std::size_t>(m.length(0));
        if (m.size() > 1 && m[1].matched) {
            pm.has_group1 = true;
            pm.group1 = m[1].str();
            pm.group1_pos = static_cast<std::size_t>(m.position(1));
        }
        out.push_back(std::move(pm));
    }
    return out;
}

bool keyword_filter_passes(const RulePattern& p, const PatternMatch& m) {
    if (p.ident_keywords.empty() || !m.has_group1) return true;
    for (const auto& kw : p.ident_keywords) {
        const bool ok = p.anchor == rules::KeywordAnchor::FinalToken
                            ? text::ident_ends_with_keyword(m.group1, kw)
                            : text::ident_contains_keyword(m.group1, kw);
        if (ok) return true;
    }
    return false;
}

// Algorithms that R-01 names, upper-cased.
const std::set<std::string>& weak_algorithms() {
    static const std::set<std::string> s = {"DES",     "DESEDE",   "RC2",     "RC4",
                                            "RC5",     "BLOWFISH", "CHACHA20"};
    return s;
}

// Algorithms the R-02 mode patterns enumerate (the weak set plus AES).
bool mode_rule_applies(const std::string& alg_upper) {
    return alg_upper == "AES" || weak_algorithms().count(alg_upper) > 0;
}

struct CipherSite {
    Span span;           // whole getInstance(...) match
    std::string literal; // transformation text, empty when variable
    std::string variable;
    bool complex_argument = false; // concatenation or similar
    bool parsed_ok = false;
    Transformation transformation;
};

const std::regex& cipher_site_re() {
    static const std::regex re(
        R"re(Cipher\s*\.\s*getInstance\s*\(\s*(?:"([^"]*)"|([A-Za-z_$][A-Za-z0-9_$]*)))re",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

// The first argument is only trustworthy when it ends right after the
// matched token: `"AES" + mode` or `algo.trim()` must stay unresolved.
bool argument_continues(std::string_view text, std::size_t after) {
    while (after < text.size() &&
           std::isspace(static_cast<unsigned char>(text[after])))
        ++after;
    if (after >= text.size()) return false;
    return text[after] != ')' && text[after] != ',';
}

const std::regex& key_size_init_re() {
    static const std::regex re(
        R"re([A-Za-z0-9_$]*(?:kgenerator|keygenerator|keygen)[A-Za-z0-9_$]*\s*\.\s*init\s*\(\s*(\d+))re",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

} // namespace

struct Scanner::Impl {
    RuleSet rs;
    std::vector<std::vector<std::regex>> compiled; // parallel to rs.rules/patterns

    explicit Impl(const RuleSet& ruleset) : rs(ruleset) {
        compiled.reserve(rs.rules.size());
        for (const auto& r : rs.rules) {
            std::vector<std::regex> res;
            res.reserve(r.patterns.size());
            for (const auto& p : r.patterns) res.push_back(compile(p));
            compiled.push_back(std::move(res));
        }
    }
};

Scanner::Scanner(const RuleSet& rs) : impl_(std::make_unique<Impl>(rs)) {}
Scanner::~Scanner() = default;
Scanner::Scanner(Scanner&&) noexcept = default;
Scanner& Scanner::operator=(Scanner&&) noexcept = default;

const RuleSet& Scanner::ruleset() const { return impl_->rs; }

const std::vector<std::string>& fast_path_tokens() {
    // The catalog cannot match without one of these substrings present.
    static const std::vector<std::string> tokens = {
        "cipher", "key",  "pbe",        "salt",          "password",
        "pass",   "iv",   "secretkey",  "messagedigest", "keystore",
        "kgenerator", "secret", "initvector", "initializationvector", "keygen"};
    return tokens;
}

bool fast_path_hit(std::string_view text_view) {
    for (const auto& tok : fast_path_tokens())
        if (text::icontains(text_view, tok)) return true;
    return false;
}

std::vector<PatternMatch> find_matches(const RulePattern& p, std::string_view text_view) {
    return run_regex(compile(p), text_view);
}

std::vector<Span> find_match_spans(const RulePattern& p, std::string_view text_view) {
    std::vector<Span> spans;
    for (const auto& m : find_matches(p, text_view)) spans.push_back(m.span);
    return spans;
}

namespace {

Finding base_finding(const Snippet& sn, const Rule& rule, Severity sev, Span span,
                     FindingStatus status) {
    Finding f;
    f.rule_id = rule.id;
    f.severity = sev;
    f.status = status;
    f.span = span;
    f.matched_text = sn.text.substr(span.begin, span.end - span.begin);
    f.section = sn.section;
    f.source_id = sn.source_id;
    f.snippet_index = sn.index;
    const LineCol lc = line_col_at(sn, span.begin);
    f.at = {lc.line + sn.base_line, lc.col};
    return f;
}

void merge_same_rule(std::vector<Finding>& findings, const Snippet& sn) {
    std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
        if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
        return a.span.end < b.span.end;
    });
    std::vector<Finding> merged;
    for (auto& f : findings) {
        if (!merged.empty() && merged.back().rule_id == f.rule_id &&
            (merged.back().span.overlaps(f.span) || merged.back().span.adjacent(f.span))) {
            Finding& prev = merged.back();
            prev.span.end = std::max(prev.span.end, f.span.end);
            prev.matched_text = sn.text.substr(prev.span.begin, prev.span.end - prev.span.begin);
            if (f.status == FindingStatus::Confirmed) prev.status = f.status;
            if (prev.evidence.empty()) prev.evidence = f.evidence;
            if (prev.matched_ident.empty()) prev.matched_ident = f.matched_ident;
            continue;
        }
        merged.push_back(std::move(f));
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Finding& a, const Finding& b) {
        if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
        if (a.span.end != b.span.end) return a.span.end < b.span.end;
        return a.rule_id < b.rule_id;
    });
    findings = std::move(merged);
}

} // namespace

std::vector<Finding> Scanner::scan_snippet(const Snippet& sn,
                                           const resolve::BindingEnv* env,
                                           ScanExtras* extras) const {
    std::vector<Finding> findings;
    if (!fast_path_hit(sn.text)) return findings;

    const RuleSet& rs = impl_->rs;
    const Rule* r01 = rs.find("R-01");
    const Rule* r02a = rs.find("R-02-a");
    const Rule* r02b = rs.find("R-02-b");

    // Cipher factory sites decide R-01/R-02 from the parsed transformation
    // rather than raw substring position.
    std::vector<CipherSite> sites;
    bool any_unparsed_site = false;
    {
        const std::string& body = sn.text;
        for (auto it = std::sregex_iterator(body.begin(), body.end(), cipher_site_re());
             it != std::sregex_iterator(); ++it) {
            CipherSite site;
            site.span.begin = static_cast<std::size_t>(it->position(0));
            site.span.end = site.span.begin + static_cast<std::size_t>(it->length(0));
            site.complex_argument = argument_continues(body, site.span.end);
            if ((*it)[1].matched) {
                site.literal = (*it)[1].str();
            } else {
                site.variable = (*it)[2].str();
            }
            sites.push_back(std::move(site));
        }
    }

    for (auto& site : sites) {
        if (site.complex_argument) {
            if (extras)
                extras->diagnostics.push_back(
                    {"skipped cipher site: transformation built from an expression",
                     sn.source_id, site.span.begin});
            continue;
        }
        std::string transformation = site.literal;
        std::string resolved_note;
        if (transformation.empty() && !site.variable.empty()) {
            if (env) {
                const auto b = env->lookup(site.variable);
                if (b.kind == resolve::BindingKind::StringLit) {
                    transformation = b.text_value;
                    resolved_note = "transformation resolved from '" + site.variable + "'";
                }
            }
            if (transformation.empty()) {
                if (extras)
                    extras->diagnostics.push_back(
                        {"skipped cipher site: argument '" + site.variable +
                             "' does not resolve to a string literal",
                         sn.source_id, site.span.begin});
                continue;
            }
        }
        const auto parsed = parse_transformation(transformation);
        if (!parsed) {
            any_unparsed_site = true;
            continue;
        }
        site.parsed_ok = true;
        site.transformation = *parsed;
        const std::string& alg = parsed->algorithm;

        if (extras && alg == "AES") {
            if (parsed->is_ecb()) extras->aes_modes.push_back("ECB");
            else if (parsed->is_cbc()) extras->aes_modes.push_back("CBC");
            else if (parsed->is_gcm()) extras->aes_modes.push_back("GCM");
            else extras->aes_modes.push_back("other");
        }

        if (r01 && r01->enabled && weak_algorithms().count(alg)) {
            Finding f = base_finding(sn, *r01,
                                     rules::severity_for(*r01, r01->patterns.front(), alg),
                                     site.span, FindingStatus::Confirmed);
            f.evidence = "algorithm " + alg;
            if (alg == "CHACHA20")
                f.evidence += " (flagged by catalog; widely considered a secure stream cipher)";
            if (!resolved_note.empty()) f.evidence += "; " + resolved_note;
            findings.push_back(std::move(f));
        }
        if (mode_rule_applies(alg)) {
            if (r02a && r02a->enabled && parsed->is_ecb()) {
                Finding f = base_finding(sn, *r02a, r02a->severity, site.span,
                                         FindingStatus::Confirmed);
                f.evidence = parsed->default_mode ? "no mode specified (defaults to ECB)"
                                                  : "explicit ECB mode";
                if (!resolved_note.empty()) f.evidence += "; " + resolved_note;
                findings.push_back(std::move(f));
            } else if (r02b && r02b->enabled && parsed->is_cbc()) {
                Finding f = base_finding(sn, *r02b, r02b->severity, site.span,
                                         FindingStatus::Confirmed);
                f.evidence = "CBC mode";
                if (!resolved_note.empty()) f.evidence += "; " + resolved_note;
                findings.push_back(std::move(f));
            }
        }
    }

    // Generic pattern loop. R-01/R-02 raw patterns only serve as a fallback
    // at sites the transformation parser could not handle.
    for (std::size_t ri = 0; ri < rs.rules.size(); ++ri) {
        const Rule& rule = rs.rules[ri];
        if (!rule.enabled) continue;
        const bool transformation_rule =
            rule.id == "R-01" || rule.id == "R-02-a" || rule.id == "R-02-b";
        if (transformation_rule && !any_unparsed_site) continue;

        for (std::size_t pi = 0; pi < rule.patterns.size(); ++pi) {
            const RulePattern& pat = rule.patterns[pi];
            for (const auto& m : run_regex(impl_->compiled[ri][pi], sn.text)) {
                if (!keyword_filter_passes(pat, m)) continue;
                if (rule.id == "R-04-b" &&
                    (text::to_lower(m.group1) == "new" || m.group1 == "null"))
                    continue;
                if (transformation_rule) {
                    // Keep only matches at sites the structured route neither
                    // decided nor deliberately skipped as unresolvable.
                    bool covered = false;
                    for (const auto& site : sites)
                        if ((site.parsed_ok || site.complex_argument) &&
                            site.span.overlaps(m.span))
                            covered = true;
                    if (covered) continue;
                }
                std::string alt_upper;
                if (transformation_rule && m.has_group1) {
                    alt_upper = m.group1;
                    std::transform(alt_upper.begin(), alt_upper.end(), alt_upper.begin(),
                                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
                }
                const Severity sev = rules::severity_for(rule, pat, alt_upper);
                const FindingStatus status = rule.mode == DetectionMode::Automatic
                                                 ? FindingStatus::Confirmed
                                                 : FindingStatus::NeedsReview;
                Finding f = base_finding(sn, rule, sev, m.span, status);
                if (m.has_group1 && !pat.ident_keywords.empty()) f.matched_ident = m.group1;
                if (rule.id == "R-04-b") f.matched_ident = m.group1;
                if (transformation_rule)
                    f.evidence = "raw pattern match (transformation not parsed)";
                findings.push_back(std::move(f));
            }
        }
    }

    if (extras) {
        const std::string& body = sn.text;
        for (auto it = std::sregex_iterator(body.begin(), body.end(), key_size_init_re());
             it != std::sregex_iterator(); ++it) {
            try {
                extras->key_bits.push_back(std::stoi((*it)[1].str()));
            } catch (...) {
            }
        }
        if (env) {
            for (const auto& [ident, b] : env->bindings) {
                if (b.kind != resolve::BindingKind::ByteArray || !b.bit_length) continue;
                if (text::ident_ends_with_keyword(ident, "key") ||
                    text::ident_ends_with_keyword(ident, "secret"))
                    extras->key_bits.push_back(static_cast<int>(*b.bit_length));
            }
        }
    }

    merge_same_rule(findings, sn);
    return findings;
}

ScanResult Scanner::scan_text(const SourceText& body, const ScanOptions& opts) const {
    ScanResult result;
    auto extraction = extract::extract(body);
    result.diagnostics = std::move(extraction.diagnostics);
    result.snippets = std::move(extraction.snippets);

    const resolve::BindingEnv env = resolve::collect_bindings(result.snippets);
    const resolve::ConfirmOptions confirm_opts{opts.strict_context};

    ScanExtras extras;
    std::vector<Finding> all;
    for (const auto& sn : result.snippets) {
        auto found = scan_snippet(sn, &env, &extras);
        for (auto& f : found) {
            if (f.status == FindingStatus::NeedsReview) {
                const Rule* rule = impl_->rs.find(f.rule_id);
                if (rule && rule->confirm != rules::ConfirmKind::None)
                    f = resolve::confirm(f, rule->confirm, env, sn, confirm_opts);
            }
            all.push_back(std::move(f));
        }
    }

    std::stable_sort(all.begin(), all.end(), [](const Finding& a, const Finding& b) {
        if (a.snippet_index != b.snippet_index) return a.snippet_index < b.snippet_index;
        if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
        return a.rule_id < b.rule_id;
    });
    result.findings = std::move(all);
    result.diagnostics.insert(result.diagnostics.end(), extras.diagnostics.begin(),
                              extras.diagnostics.end());
    result.aes_modes = std::move(extras.aes_modes);

    // Key-size bindings are per section, not per snippet; dedupe what the
    // per-snippet pass collected.
    std::set<int> bits_seen;
    for (int b : extras.key_bits) bits_seen.insert(b);
    result.key_bits.assign(bits_seen.begin(), bits_seen.end());
    return result;
}

std::vector<Finding> scan_snippet(const Snippet& sn, const RuleSet& rs,
                                  const resolve::BindingEnv* env) {
    return Scanner(rs).scan_snippet(sn, env);
}

ScanResult scan_text(const SourceText& body, const RuleSet& rs, const ScanOptions& opts) {
    return Scanner(rs).scan_text(body, opts);
}

} // namespace jcascan::engine
