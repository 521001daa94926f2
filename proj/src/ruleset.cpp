#include "jcascan/ruleset.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "jcascan/textutil.hpp"

namespace jcascan::rules {

namespace {

// Fragment shared by the assignment-style patterns: an identifier that
// contains the rule's keyword somewhere. The final-token check happens after
// matching, so the regex itself only has to narrow the candidates.
constexpr const char* IDENT = "[A-Za-z0-9_$]*";

std::string ident_with(const std::string& keywords) {
    return std::string("(") + IDENT + "(?:" + keywords + ")" + IDENT + ")";
}

Rule make_rule(std::string id, std::vector<int> cwes, Stage stage, Severity sev,
               DetectionMode mode, ConfirmKind confirm, std::string description,
               std::vector<RulePattern> patterns) {
    Rule r;
    r.id = std::move(id);
    r.cwe_ids = std::move(cwes);
    r.stage = stage;
    r.severity = sev;
    r.mode = mode;
    r.confirm = confirm;
    r.description = std::move(description);
    r.patterns = std::move(patterns);
    return r;
}

} // namespace

RuleSet builtin_ruleset() {
    RuleSet rs;
    rs.version = "1.0";

    // R-01: weak symmetric algorithm handed to the cipher factory. DESede is
    // deprecated rather than broken, so that alternative downgrades to a bad
    // practice; everything else is insecure.
    {
        Rule r = make_rule(
            "R-01", {327}, Stage::CipherInstantiation, Severity::Insecure,
            DetectionMode::Automatic, ConfirmKind::None,
            "weak encryption algorithm",
            {RulePattern{
                R"re(Cipher\.getInstance\(\s*"(DESede|DES|RC2|RC4|RC5|Blowfish|ChaCha20))re",
                Severity::Insecure, true, {}, KeywordAnchor::FinalToken}});
        r.alt_severity["DESEDE"] = Severity::BadPractice;
        rs.rules.push_back(std::move(r));
    }

    // R-02-a: ECB mode, explicit or implied by a bare algorithm name.
    rs.rules.push_back(make_rule(
        "R-02-a", {327}, Stage::CipherInstantiation, Severity::Insecure,
        DetectionMode::Automatic, ConfirmKind::None,
        "ECB encryption mode (explicit or default)",
        {RulePattern{
            R"re(Cipher\.getInstance\(\s*"(?:AES|DESede|DES|RC2|RC4|RC5|Blowfish|ChaCha20)(?:/ECB(?:/[^"\n]*)?)?\s*")re",
            Severity::Insecure, true, {}, KeywordAnchor::FinalToken}}));

    // R-02-b: CBC mode; secure in isolation but lacks integrity protection,
    // so it counts as a bad practice.
    rs.rules.push_back(make_rule(
        "R-02-b", {327}, Stage::CipherInstantiation, Severity::BadPractice,
        DetectionMode::Automatic, ConfirmKind::None,
        "CBC encryption mode",
        {RulePattern{
            R"re(Cipher\.getInstance\(\s*"(?:AES|DESede|DES|RC2|RC4|RC5|Blowfish|ChaCha20)/CBC)re",
            Severity::BadPractice, true, {}, KeywordAnchor::FinalToken}}));

    // R-03-a: static or constant key material.
    rs.rules.push_back(make_rule(
        "R-03-a", {798}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::ConstantValue,
        "static or constant key",
        {RulePattern{
            ident_with("key|secret") +
                R"re(\s*=\s*(?:"|\{|new\s+byte\[\]\s*\{)|SecretKeySpec\(\s*")re",
            Severity::Insecure, true, {"key", "secret"}, KeywordAnchor::FinalToken}}));

    // R-03-b: static salt for key derivation.
    rs.rules.push_back(make_rule(
        "R-03-b", {330}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::ConstantValue,
        "static salt for key derivation",
        {RulePattern{
            R"re(PBEKeySpec\(\s*\S+\s*,\s*"\S+"\s*,\s*\S+|PBEParameterSpec\(\s*"|)re" +
                ident_with("salt") + R"re(\s*=\s*(?:"|\{|new\s+byte\[\]\s*\{))re",
            Severity::Insecure, true, {"salt"}, KeywordAnchor::FinalToken}}));

    // R-03-c: salt below 64 bits; the match only nominates the site, the
    // resolver checks the size.
    rs.rules.push_back(make_rule(
        "R-03-c", {326, 330}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::SaltLength,
        "salt shorter than 64 bits for key derivation",
        {RulePattern{
            ident_with("salt") + R"re(\s*=|PBEKeySpec\(|PBEParameterSpec\()re",
            Severity::Insecure, true, {"salt"}, KeywordAnchor::FinalToken}}));

    // R-03-d: fewer than 1000 key-derivation iterations. The literal
    // alternative deliberately matches the leading 1-3 digits of any count;
    // the resolver reads the full value and decides.
    rs.rules.push_back(make_rule(
        "R-03-d", {326, 330}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::IterationCount,
        "fewer than 1000 iterations for key derivation",
        {RulePattern{
            R"re(PBEKeySpec\(\s*\S+\s*,\s*\S+\s*,\s*[1-9]\d{0,2}|PBEParameterSpec\(\s*\S+\s*,\s*[1-9]\d{0,2}|)re" +
                ident_with("salt") + R"re(\s*=)re",
            Severity::Insecure, true, {"salt"}, KeywordAnchor::FinalToken}}));

    // R-03-e: hard-coded password.
    rs.rules.push_back(make_rule(
        "R-03-e", {259}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::ConstantValue,
        "hard-coded password",
        {RulePattern{
            ident_with("password|pass") + R"re(\s*=\s*"|PBEKeySpec\(\s*")re",
            Severity::Insecure, true, {"password", "pass"}, KeywordAnchor::FinalToken}}));

    // R-03-f: key generator seeded from a questionable random source.
    rs.rules.push_back(make_rule(
        "R-03-f", {330}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::RandomSource,
        "weak random source for secret key generation",
        {RulePattern{
            ident_with("kgenerator|keygenerator|keygen") +
                R"re(\s*\.\s*init\s*\(\s*\d+\s*,\s*(?:new\s+[A-Za-z_$][A-Za-z0-9_$]*\s*\([^)]*\)|[A-Za-z_$][A-Za-z0-9_$]*)\s*\))re",
            Severity::Insecure, true, {"kgenerator", "keygenerator", "keygen"},
            KeywordAnchor::FinalToken}}));

    // R-03-g: weak key-derivation algorithms. Split per alternative so each
    // carries its own severity.
    rs.rules.push_back(make_rule(
        "R-03-g", {327}, Stage::KeyInitialization, Severity::Insecure,
        DetectionMode::Automatic, ConfirmKind::None,
        "weak algorithm for generating a secret key",
        {RulePattern{R"re(SecretKeyFactory\.getInstance\(\s*"PBEWithMD5AndDES")re",
                     Severity::Insecure, true, {}, KeywordAnchor::FinalToken},
         RulePattern{R"re(SecretKeyFactory\.getInstance\(\s*"PBKDF2WithHmacSHA1")re",
                     Severity::BadPractice, true, {}, KeywordAnchor::FinalToken},
         RulePattern{
             R"re(MessageDigest\.getInstance\(\s*"SHA-1"[^\n]*\n*[^\n]*\n*[^\n]*\.digest\(\s*)re" +
                 ident_with("key"),
             Severity::Insecure, true, {"key"}, KeywordAnchor::AnyToken}}));

    // R-04-a: static IV.
    rs.rules.push_back(make_rule(
        "R-04-a", {330}, Stage::IvInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::ConstantValue,
        "static initialization vector",
        {RulePattern{
            ident_with("iv|initvector|initializationvector") +
                R"re(\s*=\s*(?:"|\{|new\s+byte\[\]\s*\{)|IvParameterSpec\(\s*(?:"|\{|new\s+byte\[\]\s*\{))re",
            Severity::Insecure, true, {"iv", "initvector", "initializationvector"},
            KeywordAnchor::FinalToken}}));

    // R-04-b: IvParameterSpec fed a non-literal argument whose derivation
    // needs review; the resolver dismisses arguments filled from a strong
    // random source and confirms ones that resolve to constants.
    rs.rules.push_back(make_rule(
        "R-04-b", {330}, Stage::IvInitialization, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::ConstantValue,
        "badly-derived initialization vector",
        {RulePattern{R"re(IvParameterSpec\(\s*([A-Za-z_$][A-Za-z0-9_$]*))re",
                     Severity::Insecure, true, {}, KeywordAnchor::FinalToken}}));

    // R-05: keystore loaded with a constant, non-null password.
    rs.rules.push_back(make_rule(
        "R-05", {798}, Stage::ParameterTransmission, Severity::Insecure,
        DetectionMode::Candidate, ConfirmKind::KeystorePassword,
        "keystore loaded with a constant non-null password",
        {RulePattern{ident_with("keystore") + R"re(\s*\.\s*load\s*\()re",
                     Severity::Insecure, true, {"keystore"}, KeywordAnchor::FinalToken}}));

    return rs;
}

const Rule* RuleSet::find(const std::string& id) const {
    for (const auto& r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

std::size_t RuleSet::active_count() const {
    std::size_t n = 0;
    for (const auto& r : rules)
        if (r.enabled) ++n;
    return n;
}

Severity severity_for(const Rule& rule, const RulePattern& pattern,
                      const std::string& alt_token_upper) {
    if (!alt_token_upper.empty()) {
        auto it = rule.alt_severity.find(alt_token_upper);
        if (it != rule.alt_severity.end()) return it->second;
    }
    return pattern.severity;
}

const char* severity_name(Severity s) {
    return s == Severity::Insecure ? "insecure" : "bad_practice";
}

const char* stage_name(Stage s) {
    switch (s) {
    case Stage::CipherInstantiation: return "cipher_instantiation";
    case Stage::KeyInitialization: return "key_initialization";
    case Stage::IvInitialization: return "iv_initialization";
    case Stage::ParameterTransmission: return "parameter_transmission";
    }
    return "unknown";
}

const char* confirm_kind_name(ConfirmKind k) {
    switch (k) {
    case ConfirmKind::None: return "none";
    case ConfirmKind::SaltLength: return "salt_length";
    case ConfirmKind::IterationCount: return "iteration_count";
    case ConfirmKind::RandomSource: return "random_source";
    case ConfirmKind::KeystorePassword: return "keystore_password";
    case ConfirmKind::ConstantValue: return "constant_value";
    }
    return "unknown";
}

OverrideConfig parse_override_config(const std::string& text) {
    OverrideConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const auto colon = body.find(':');
        if (colon == std::string_view::npos)
            throw ConfigError("override config line " + std::to_string(lineno) +
                              ": expected 'key: value'");
        std::string key(text::trim(body.substr(0, colon)));
        std::string value = text::to_lower(std::string(text::trim(body.substr(colon + 1))));
        if (key.empty() || value.empty())
            throw ConfigError("override config line " + std::to_string(lineno) +
                              ": empty key or value");

        OverrideConfig::Entry e;
        const auto dot = key.rfind(".severity");
        if (dot != std::string::npos && dot + 9 == key.size()) {
            e.rule_id = key.substr(0, dot);
            e.sets_severity = true;
            if (value == "insecure") e.severity = Severity::Insecure;
            else if (value == "bad_practice") e.severity = Severity::BadPractice;
            else
                throw ConfigError("override config line " + std::to_string(lineno) +
                                  ": unknown severity '" + value + "'");
        } else {
            e.rule_id = key;
            e.sets_enabled = true;
            if (value == "enabled") e.enabled = true;
            else if (value == "disabled") e.enabled = false;
            else
                throw ConfigError("override config line " + std::to_string(lineno) +
                                  ": expected enabled|disabled, got '" + value + "'");
        }
        cfg.entries.push_back(std::move(e));
    }
    return cfg;
}

RuleSet apply_overrides(const RuleSet& base, const OverrideConfig& config) {
    RuleSet out = base;
    for (const auto& e : config.entries) {
        Rule* rule = nullptr;
        for (auto& r : out.rules)
            if (r.id == e.rule_id) rule = &r;
        if (!rule) throw ConfigError("unknown rule id " + e.rule_id);
        if (e.sets_enabled) rule->enabled = e.enabled;
        if (e.sets_severity) {
            rule->severity = e.severity;
            for (auto& p : rule->patterns) p.severity = e.severity;
            rule->alt_severity.clear();
        }
    }
    return out;
}

std::vector<std::string> validate_ruleset(const RuleSet& rs) {
    std::vector<std::string> diags;
    if (rs.rules.empty()) diags.push_back("rule set is empty");

    std::set<std::string> seen;
    for (const auto& r : rs.rules) {
        if (!seen.insert(r.id).second)
            diags.push_back("duplicate rule id " + r.id);
        if (r.cwe_ids.empty())
            diags.push_back("rule " + r.id + " carries no CWE id");
        if (r.patterns.empty())
            diags.push_back("rule " + r.id + " carries no pattern");
        if (r.mode == DetectionMode::Automatic && r.confirm != ConfirmKind::None)
            diags.push_back("rule " + r.id + " is automatic but has a confirm step");
        for (const auto& p : r.patterns) {
            try {
                auto flags = std::regex::ECMAScript;
                if (p.case_insensitive) flags |= std::regex::icase;
                std::regex probe(p.regex, flags);
            } catch (const std::regex_error& err) {
                diags.push_back("rule " + r.id + " pattern does not compile: " +
                                p.regex + " (" + err.what() + ")");
            }
        }
    }
    return diags;
}

} // namespace jcascan::rules
