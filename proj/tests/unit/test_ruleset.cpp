#include <doctest.h>

#include <set>

#include "jcascan/ruleset.hpp"

using namespace jcascan;
using namespace jcascan::rules;

TEST_CASE("builtin catalog has 13 rules with distinct ids") {
    const RuleSet rs = builtin_ruleset();
    CHECK(rs.rules.size() == 13);
    std::set<std::string> ids;
    for (const auto& r : rs.rules) ids.insert(r.id);
    CHECK(ids.size() == 13);
}

TEST_CASE("rule metadata matches the catalog") {
    const RuleSet rs = builtin_ruleset();

    const Rule* r01 = rs.find("R-01");
    REQUIRE(r01);
    CHECK(r01->cwe_ids == std::vector<int>{327});
    CHECK(r01->stage == Stage::CipherInstantiation);
    CHECK(r01->mode == DetectionMode::Automatic);
    CHECK(r01->alt_severity.at("DESEDE") == Severity::BadPractice);

    const Rule* r05 = rs.find("R-05");
    REQUIRE(r05);
    CHECK(r05->confirm == ConfirmKind::KeystorePassword);
    CHECK(r05->mode == DetectionMode::Candidate);
    CHECK(r05->stage == Stage::ParameterTransmission);
    CHECK(r05->cwe_ids == std::vector<int>{798});

    const Rule* r02b = rs.find("R-02-b");
    REQUIRE(r02b);
    CHECK(r02b->severity == Severity::BadPractice);

    // Automatic rules are exactly the four the regexes decide alone.
    const std::set<std::string> automatic = {"R-01", "R-02-a", "R-02-b", "R-03-g"};
    for (const auto& r : rs.rules) {
        if (automatic.count(r.id)) {
            CHECK(r.mode == DetectionMode::Automatic);
            CHECK(r.confirm == ConfirmKind::None);
        } else {
            CHECK(r.mode == DetectionMode::Candidate);
            CHECK(r.confirm != ConfirmKind::None);
        }
    }

    CHECK(rs.find("R-03-c")->confirm == ConfirmKind::SaltLength);
    CHECK(rs.find("R-03-d")->confirm == ConfirmKind::IterationCount);
    CHECK(rs.find("R-03-f")->confirm == ConfirmKind::RandomSource);
    for (const char* id : {"R-03-a", "R-03-b", "R-03-e", "R-04-a", "R-04-b"})
        CHECK(rs.find(id)->confirm == ConfirmKind::ConstantValue);

    // PBKDF2WithHmacSHA1 is the bad-practice alternative of R-03-g.
    const Rule* r03g = rs.find("R-03-g");
    REQUIRE(r03g);
    bool has_bad_practice_pattern = false;
    for (const auto& p : r03g->patterns)
        if (p.severity == Severity::BadPractice &&
            p.regex.find("PBKDF2WithHmacSHA1") != std::string::npos)
            has_bad_practice_pattern = true;
    CHECK(has_bad_practice_pattern);

    CHECK(rs.find("R-03-c")->cwe_ids == std::vector<int>{326, 330});
    CHECK(rs.find("R-03-e")->cwe_ids == std::vector<int>{259});
}

TEST_CASE("builtin catalog is deterministic") {
    const RuleSet a = builtin_ruleset();
    const RuleSet b = builtin_ruleset();
    REQUIRE(a.rules.size() == b.rules.size());
    for (std::size_t i = 0; i < a.rules.size(); ++i) {
        CHECK(a.rules[i].id == b.rules[i].id);
        CHECK(a.rules[i].severity == b.rules[i].severity);
        CHECK(a.rules[i].cwe_ids == b.rules[i].cwe_ids);
        REQUIRE(a.rules[i].patterns.size() == b.rules[i].patterns.size());
        for (std::size_t j = 0; j < a.rules[i].patterns.size(); ++j)
            CHECK(a.rules[i].patterns[j].regex == b.rules[i].patterns[j].regex);
    }
}

TEST_CASE("validate_ruleset accepts the shipped catalog") {
    CHECK(validate_ruleset(builtin_ruleset()).empty());
}

TEST_CASE("validate_ruleset flags duplicate ids") {
    RuleSet rs = builtin_ruleset();
    rs.rules.push_back(rs.rules.front());
    const auto diags = validate_ruleset(rs);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("R-01") != std::string::npos);
}

TEST_CASE("validate_ruleset flags an automatic rule with a confirm step") {
    RuleSet rs = builtin_ruleset();
    for (auto& r : rs.rules)
        if (r.id == "R-01") r.confirm = ConfirmKind::SaltLength;
    const auto diags = validate_ruleset(rs);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("R-01") != std::string::npos);
    CHECK(diags[0].find("automatic") != std::string::npos);
}

TEST_CASE("validate_ruleset flags non-compiling patterns") {
    RuleSet rs = builtin_ruleset();
    rs.rules[0].patterns[0].regex = "(unbalanced";
    const auto diags = validate_ruleset(rs);
    REQUIRE(!diags.empty());
    CHECK(diags[0].find("(unbalanced") != std::string::npos);
}

TEST_CASE("overrides disable and re-enable rules") {
    const RuleSet base = builtin_ruleset();
    const auto cfg = parse_override_config("R-02-b: disabled\n");
    const RuleSet rs = apply_overrides(base, cfg);
    CHECK(rs.active_count() == 12);
    CHECK_FALSE(rs.find("R-02-b")->enabled);
    // base untouched
    CHECK(base.active_count() == 13);

    // idempotent
    const RuleSet rs2 = apply_overrides(rs, cfg);
    CHECK(rs2.active_count() == 12);
}

TEST_CASE("empty override config is the identity") {
    const RuleSet base = builtin_ruleset();
    const RuleSet rs = apply_overrides(base, parse_override_config(""));
    CHECK(rs.rules.size() == base.rules.size());
    CHECK(rs.active_count() == base.active_count());
}

TEST_CASE("unknown rule id in overrides raises a config error") {
    const auto cfg = parse_override_config("R-99: disabled\n");
    CHECK_THROWS_WITH_AS(apply_overrides(builtin_ruleset(), cfg),
                         "unknown rule id R-99", ConfigError);
}

TEST_CASE("severity overrides rewrite the rule and its alternatives") {
    const auto cfg = parse_override_config("R-01.severity: bad_practice\n");
    const RuleSet rs = apply_overrides(builtin_ruleset(), cfg);
    const Rule* r01 = rs.find("R-01");
    CHECK(r01->severity == Severity::BadPractice);
    CHECK(r01->alt_severity.empty());
    for (const auto& p : r01->patterns) CHECK(p.severity == Severity::BadPractice);
}

TEST_CASE("malformed override lines report their line number") {
    CHECK_THROWS_AS(parse_override_config("R-01 disabled\n"), ConfigError);
    try {
        parse_override_config("# comment\nR-01: nonsense\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}
