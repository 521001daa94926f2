#include <doctest.h>

#include "jcascan/extractor.hpp"
#include "jcascan/resolver.hpp"
#include "rule_fixtures.hpp"
#include "test_helpers.hpp"

using namespace jcascan;
using namespace jcascan::resolve;
using jcascan::engine::Finding;
using jcascan::engine::FindingStatus;

namespace {

BindingEnv env_of(const std::string& code) {
    SourceText body;
    body.raw = code;
    body.origin = Origin::PlainFile;
    body.section = Section::Standalone;
    body.source_id = "env";
    const auto ex = extract::extract(body);
    return collect_bindings(ex.snippets);
}

Snippet snippet_of(const std::string& code) {
    SourceText body;
    body.raw = code;
    body.origin = Origin::PlainFile;
    body.section = Section::Standalone;
    body.source_id = "env";
    return extract::extract(body).snippets.at(0);
}

Finding synthetic_finding(const std::string& rule_id, const Snippet& sn,
                          const std::string& needle) {
    Finding f;
    f.rule_id = rule_id;
    f.status = FindingStatus::NeedsReview;
    const auto at = sn.text.find(needle);
    REQUIRE(at != std::string::npos);
    f.span = {at, at + needle.size()};
    f.matched_text = needle;
    f.source_id = sn.source_id;
    return f;
}

} // namespace

TEST_CASE("collect_bindings recognizes the declared forms") {
    const auto env = env_of(
        "byte[] salt = new byte[4];\n"
        "String SALT2 = \"deliciously salty\";\n"
        "int iterations = getIterations();\n"
        "int rounds = 1000;\n"
        "char sep = ';';\n"
        "String nothing = null;\n"
        "byte[] fromInit = new byte[]{1, 2, 3};\n"
        "byte[] bare = {1, 2, 3, 4, 5};\n"
        "char[] pw = \"changeit\".toCharArray();\n"
        "char[] cs = new char[]{'a', 'b'};\n");

    CHECK(env.lookup("salt").kind == BindingKind::ByteArray);
    CHECK(*env.lookup("salt").bit_length == 32);

    CHECK(env.lookup("SALT2").kind == BindingKind::StringLit);
    CHECK(*env.lookup("SALT2").bit_length == 136);

    CHECK(env.lookup("iterations").kind == BindingKind::ExprUnknown);

    CHECK(env.lookup("rounds").kind == BindingKind::IntLit);
    CHECK(env.lookup("rounds").int_value == 1000);

    CHECK(env.lookup("sep").kind == BindingKind::StringLit);
    CHECK(*env.lookup("sep").bit_length == 8);

    CHECK(env.lookup("nothing").kind == BindingKind::NullLit);

    CHECK(env.lookup("fromInit").kind == BindingKind::ByteArray);
    CHECK(*env.lookup("fromInit").bit_length == 24);

    CHECK(env.lookup("bare").kind == BindingKind::ByteArray);
    CHECK(*env.lookup("bare").bit_length == 40);

    CHECK(env.lookup("pw").kind == BindingKind::CharArray);
    CHECK(*env.lookup("pw").bit_length == 64);

    CHECK(env.lookup("cs").kind == BindingKind::CharArray);
    CHECK(*env.lookup("cs").bit_length == 16);

    CHECK(env.lookup("missing").kind == BindingKind::ExprUnknown);
}

TEST_CASE("array initializers tolerate trailing commas and nesting") {
    const auto env = env_of(
        "byte[] trailing = {1, 2, 3, };\n"
        "byte[] nested = {(byte) (1 + 2), foo(3, 4), 5};");
    CHECK(*env.lookup("trailing").bit_length == 24);
    CHECK(*env.lookup("nested").bit_length == 24);
}

TEST_CASE("later assignments shadow earlier ones") {
    const auto env = env_of("int n = 100;\nint n2 = 5;\nn = 2000;");
    CHECK(env.lookup("n").int_value == 2000);
}

TEST_CASE("permuting statements with disjoint identifiers leaves the env equal") {
    const auto a = env_of("byte[] salt = new byte[8];\nint iter = 100;\nString pw = \"x\";");
    const auto b = env_of("String pw = \"x\";\nbyte[] salt = new byte[8];\nint iter = 100;");
    REQUIRE(a.bindings.size() == b.bindings.size());
    for (const auto& [name, binding] : a.bindings) {
        const auto other = b.lookup(name);
        CHECK(other.kind == binding.kind);
        CHECK(other.int_value == binding.int_value);
        CHECK(other.bit_length == binding.bit_length);
    }
}

TEST_CASE("multi-byte characters count as UTF-8 bytes") {
    const auto env = env_of("String salt = \"s\\u00e4lt\";"); // a-umlaut: 2 bytes
    CHECK(*env.lookup("salt").bit_length == 5 * 8); // s, 2-byte a-umlaut, l, t
}

TEST_CASE("confirm on an automatic rule is a contract violation") {
    const auto sn = snippet_of("Cipher.getInstance(\"DES\");");
    const auto env = env_of(sn.text);
    const auto f = synthetic_finding("R-01", sn, "Cipher.getInstance(\"DES\"");
    CHECK_THROWS_AS(confirm(f, rules::ConfirmKind::None, env, sn), std::invalid_argument);
}

TEST_CASE("iteration count below 1000 confirms with evidence") {
    const auto sn = snippet_of("PBEKeySpec spec = new PBEKeySpec(pw, salt, 100, 256);");
    const auto env = env_of(sn.text);
    auto f = synthetic_finding("R-03-d", sn, "PBEKeySpec(pw, salt, 100");
    const auto out = confirm(f, rules::ConfirmKind::IterationCount, env, sn);
    CHECK(out.status == FindingStatus::Confirmed);
    CHECK(out.evidence.find("iterations=100") != std::string::npos);
}

TEST_CASE("sixteen-byte salt dismisses the salt-length candidate") {
    const auto sn = snippet_of("byte[] salt = new byte[16];\nPBEKeySpec spec = new PBEKeySpec(pw, salt, 100, 256);");
    const auto env = env_of(sn.text);
    auto f = synthetic_finding("R-03-c", sn, "salt =");
    f.matched_ident = "salt";
    const auto out = confirm(f, rules::ConfirmKind::SaltLength, env, sn);
    CHECK(out.status == FindingStatus::Dismissed);
}

TEST_CASE("keystore password decisions") {
    SUBCASE("null literal dismisses") {
        const auto sn = snippet_of("ks.load(fis, null);");
        const auto env = env_of(sn.text);
        const auto f = synthetic_finding("R-05", sn, "ks.load(");
        const auto out = confirm(f, rules::ConfirmKind::KeystorePassword, env, sn);
        CHECK(out.status == FindingStatus::Dismissed);
    }
    SUBCASE("constant char array confirms") {
        const auto sn = snippet_of("ks.load(fis, \"changeit\".toCharArray());");
        const auto env = env_of(sn.text);
        const auto f = synthetic_finding("R-05", sn, "ks.load(");
        const auto out = confirm(f, rules::ConfirmKind::KeystorePassword, env, sn);
        CHECK(out.status == FindingStatus::Confirmed);
    }
    SUBCASE("identifier bound to a literal confirms") {
        const auto sn = snippet_of("char[] pw = \"secret\".toCharArray();\nks.load(fis, pw);");
        const auto env = env_of(sn.text);
        const auto f = synthetic_finding("R-05", sn, "ks.load(");
        const auto out = confirm(f, rules::ConfirmKind::KeystorePassword, env, sn);
        CHECK(out.status == FindingStatus::Confirmed);
    }
    SUBCASE("opaque call stays in review") {
        const auto sn = snippet_of("ks.load(fis, fetchPassword());");
        const auto env = env_of(sn.text);
        const auto f = synthetic_finding("R-05", sn, "ks.load(");
        const auto out = confirm(f, rules::ConfirmKind::KeystorePassword, env, sn);
        CHECK(out.status == FindingStatus::NeedsReview);
    }
}

TEST_CASE("confirm changes only status and evidence") {
    using helpers::scan_code;
    for (const auto& fx : fixtures::all()) {
        SourceText body;
        body.raw = fx.code;
        body.origin = Origin::PlainFile;
        body.section = Section::Standalone;
        body.source_id = fx.name;
        const auto ex = extract::extract(body);
        if (ex.snippets.empty()) continue;
        const auto env = collect_bindings(ex.snippets);
        const auto& rs = helpers::catalog();
        for (const auto& sn : ex.snippets) {
            for (const auto& f : engine::scan_snippet(sn, rs, &env)) {
                const auto* rule = rs.find(f.rule_id);
                if (!rule || rule->confirm == rules::ConfirmKind::None) continue;
                if (f.status != FindingStatus::NeedsReview) continue;
                const auto out = confirm(f, rule->confirm, env, sn);
                CHECK(out.rule_id == f.rule_id);
                CHECK(out.span == f.span);
                CHECK(out.severity == f.severity);
            }
        }
    }
}

TEST_CASE("unrelated bindings never flip confirmed or dismissed outcomes") {
    using helpers::rule_outcome;
    using helpers::scan_code;
    for (const auto& fx : fixtures::all()) {
        const std::string base = fx.code;
        const std::string spiked =
            std::string("int zzzUnrelated = 7;\nString zzzLabel = \"tag\";\n") + base;
        const auto before = rule_outcome(scan_code(base), fx.rule_id);
        const auto after = rule_outcome(scan_code(spiked), fx.rule_id);
        if (before == "confirmed" || before == "dismissed") {
            INFO("fixture ", std::string(fx.name));
            CHECK(after == before);
        }
    }
}

TEST_CASE("identifiers containing '$' resolve without breaking the search") {
    using helpers::rule_outcome;
    using helpers::scan_code;
    const std::string code =
        "SecureRandom rnd$0 = new SecureRandom();\n"
        "byte[] iv$buf = new byte[16];\n"
        "rnd$0.nextBytes(iv$buf);\n"
        "IvParameterSpec spec = new IvParameterSpec(iv$buf);";
    CHECK(rule_outcome(scan_code(code), "R-04-b") == "dismissed");
}

TEST_CASE("strict context confirms decorative constants") {
    using helpers::rule_outcome;
    using helpers::scan_code;
    const std::string code = "String salt = \"just seasoning\";\nSystem.out.println(salt);";
    CHECK(rule_outcome(scan_code(code, false), "R-03-b") == "dismissed");
    CHECK(rule_outcome(scan_code(code, true), "R-03-b") == "confirmed");
}
