#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "jcascan/report.hpp"
#include "test_helpers.hpp"

using namespace jcascan;
using namespace jcascan::report;
using jcascan::engine::Finding;
using jcascan::engine::FindingStatus;

namespace {

Finding confirmed(const std::string& rule, const std::string& source, Section section,
                  std::size_t begin = 0) {
    Finding f;
    f.rule_id = rule;
    f.status = FindingStatus::Confirmed;
    f.section = section;
    f.source_id = source;
    f.span = {begin, begin + 5};
    return f;
}

corpus::PostBundle bundle(long long id, int year, bool solved, int score = 0) {
    corpus::PostBundle b;
    b.question.id = id;
    b.question.post_type = 1;
    b.question.year = year;
    b.question.score = score;
    b.solved = solved;
    if (solved) {
        corpus::PostRecord a;
        a.id = id * 10;
        a.post_type = 2;
        a.parent_id = id;
        b.question.accepted_answer_id = a.id;
        b.accepted_answer = a;
    }
    return b;
}

// Brute-force recount: group confirmed findings by (rule, post), dedupe,
// split by solved. Independent of tally_by_rule's implementation.
std::map<std::string, std::array<long long, 3>> brute_force_tally(
    const std::vector<Finding>& findings, const std::vector<corpus::PostBundle>& bundles) {
    std::map<std::string, bool> solved_by_id;
    for (const auto& b : bundles) solved_by_id[std::to_string(b.question.id)] = b.solved;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& f : findings)
        if (f.status == FindingStatus::Confirmed) pairs.insert({f.rule_id, f.source_id});
    std::map<std::string, std::array<long long, 3>> out; // solved, pending, total
    for (const auto& [rule, source] : pairs) {
        auto& row = out[rule];
        if (solved_by_id.at(source)) ++row[0];
        else ++row[1];
        ++row[2];
    }
    return out;
}

} // namespace

TEST_CASE("tally_by_rule counts posts, not matches") {
    const std::vector<corpus::PostBundle> bundles = {
        bundle(1, 2020, true), bundle(2, 2021, false), bundle(3, 2019, false)};
    std::vector<Finding> findings;
    findings.push_back(confirmed("R-01", "1", Section::Question));
    findings.push_back(confirmed("R-01", "1", Section::AcceptedAnswer, 40)); // same post
    findings.push_back(confirmed("R-01", "2", Section::Question));
    findings.push_back(confirmed("R-01", "3", Section::Question));
    // non-confirmed findings are excluded
    Finding review = confirmed("R-02-a", "2", Section::Question);
    review.status = FindingStatus::NeedsReview;
    findings.push_back(review);

    const auto tallies = tally_by_rule(findings, bundles, helpers::catalog());
    const auto r01 = std::find_if(tallies.begin(), tallies.end(),
                                  [](const RuleTally& t) { return t.rule_id == "R-01"; });
    REQUIRE(r01 != tallies.end());
    CHECK(r01->solved_posts == 1);
    CHECK(r01->pending_posts == 2);
    CHECK(r01->total_posts == 3);
    CHECK(r01->total_findings == 4);

    const auto r02a = std::find_if(tallies.begin(), tallies.end(),
                                   [](const RuleTally& t) { return t.rule_id == "R-02-a"; });
    REQUIRE(r02a != tallies.end());
    CHECK(r02a->total_posts == 0);

    // matches the independent recount
    const auto brute = brute_force_tally(findings, bundles);
    for (const auto& t : tallies) {
        const auto it = brute.find(t.rule_id);
        if (it == brute.end()) {
            CHECK(t.total_posts == 0);
        } else {
            CHECK(t.solved_posts == it->second[0]);
            CHECK(t.pending_posts == it->second[1]);
            CHECK(t.total_posts == it->second[2]);
        }
    }
}

TEST_CASE("tallies keep catalog order") {
    const std::vector<corpus::PostBundle> bundles = {bundle(1, 2020, true)};
    const auto tallies = tally_by_rule({}, bundles, helpers::catalog());
    REQUIRE(tallies.size() == 13);
    CHECK(tallies.front().rule_id == "R-01");
    CHECK(tallies.back().rule_id == "R-05");
    for (const auto& t : tallies) CHECK(t.total_posts == 0);
}

TEST_CASE("orphan findings raise an aggregation error naming the source") {
    const std::vector<corpus::PostBundle> bundles = {bundle(1, 2020, true)};
    const std::vector<Finding> findings = {confirmed("R-01", "777", Section::Question)};
    try {
        tally_by_rule(findings, bundles, helpers::catalog());
        FAIL("expected AggregationError");
    } catch (const AggregationError& e) {
        CHECK(std::string(e.what()).find("777") != std::string::npos);
    }
}

TEST_CASE("mode shares normalize per year") {
    std::vector<PostScan> posts;
    const auto add = [&](long long id, int year, std::vector<std::string> modes) {
        PostScan p;
        p.id = id;
        p.year = year;
        p.aes_modes = std::move(modes);
        posts.push_back(std::move(p));
    };
    add(1, 2015, {"ECB"});
    add(2, 2015, {"ECB"});
    add(3, 2015, {"CBC"});
    add(4, 2015, {"GCM"});
    add(5, 2016, {}); // no AES: contributes nothing

    const auto shares = mode_share_by_year(posts);
    REQUIRE(shares.count(2015));
    CHECK(shares.at(2015).ecb == doctest::Approx(0.5));
    CHECK(shares.at(2015).cbc == doctest::Approx(0.25));
    CHECK(shares.at(2015).gcm == doctest::Approx(0.25));
    CHECK(shares.at(2015).other == doctest::Approx(0.0));
    CHECK_FALSE(shares.count(2016));
}

TEST_CASE("a post contributes once per distinct mode") {
    std::vector<PostScan> posts(2);
    posts[0].id = 1;
    posts[0].year = 2020;
    posts[0].aes_modes = {"CBC", "GCM", "CBC"}; // dedupes to CBC+GCM
    posts[1].id = 2;
    posts[1].year = 2020;
    posts[1].aes_modes = {"ECB"};
    const auto shares = mode_share_by_year(posts);
    CHECK(shares.at(2020).cbc == doctest::Approx(1.0 / 3));
    CHECK(shares.at(2020).gcm == doctest::Approx(1.0 / 3));
    CHECK(shares.at(2020).ecb == doctest::Approx(1.0 / 3));
}

TEST_CASE("2023-style share split renders exactly") {
    // 16 posts: 6 ECB, 3 CBC, 6 GCM, 1 other.
    std::vector<PostScan> posts;
    long long id = 1;
    const auto add_n = [&](int n, const char* mode) {
        for (int i = 0; i < n; ++i) {
            PostScan p;
            p.id = id++;
            p.year = 2023;
            p.aes_modes = {mode};
            posts.push_back(std::move(p));
        }
    };
    add_n(6, "ECB");
    add_n(3, "CBC");
    add_n(6, "GCM");
    add_n(1, "other");
    const auto shares = mode_share_by_year(posts);
    CHECK(shares.at(2023).ecb == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(shares.at(2023).cbc == doctest::Approx(0.1875).epsilon(1e-12));
    CHECK(shares.at(2023).gcm == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(shares.at(2023).other == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("shares sum to one for every populated year") {
    std::mt19937_64 rng(99);
    std::vector<PostScan> posts;
    const char* modes[] = {"ECB", "CBC", "GCM", "other"};
    for (int i = 0; i < 400; ++i) {
        PostScan p;
        p.id = i;
        p.year = 2009 + static_cast<int>(rng() % 15);
        const int k = 1 + static_cast<int>(rng() % 3);
        for (int j = 0; j < k; ++j) p.aes_modes.push_back(modes[rng() % 4]);
        posts.push_back(std::move(p));
    }
    for (const auto& [year, s] : mode_share_by_year(posts))
        CHECK(std::abs(s.ecb + s.cbc + s.gcm + s.other - 1.0) < 1e-9);
}

TEST_CASE("posts_per_year counts question creation years") {
    const std::vector<corpus::PostBundle> bundles = {
        bundle(1, 2020, true), bundle(2, 2020, false), bundle(3, 2022, false)};
    const auto by_year = posts_per_year(bundles);
    CHECK(by_year.at(2020) == 2);
    CHECK(by_year.at(2022) == 1);
    CHECK(by_year.size() == 2);
    CHECK(posts_per_year(std::vector<corpus::PostBundle>{}).empty());
}

TEST_CASE("a generated 1000-bundle population reproduces its year histogram exactly") {
    std::map<int, long long> truth;
    std::vector<corpus::PostBundle> bundles;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const int year = 2008 + static_cast<int>(rng() % 16);
        ++truth[year];
        bundles.push_back(bundle(1000 + i, year, i % 2 == 0));
    }
    CHECK(posts_per_year(bundles) == truth);
}

TEST_CASE("cohen_kappa worked examples") {
    const std::vector<std::string> a1 = {"1", "1", "0", "0"};
    CHECK(cohen_kappa(a1, a1) == doctest::Approx(1.0));

    const std::vector<std::string> b1 = {"1", "0", "0", "1"};
    CHECK(cohen_kappa(a1, b1) == doctest::Approx(0.0));

    const std::vector<std::string> a2 = {"1", "0", "1", "0"};
    const std::vector<std::string> b2 = {"0", "1", "0", "1"};
    CHECK(cohen_kappa(a2, b2) == doctest::Approx(-1.0));
}

TEST_CASE("cohen_kappa degenerate and error cases") {
    const std::vector<std::string> same = {"x", "x", "x"};
    CHECK(cohen_kappa(same, same) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cohen_kappa({"a"}, {"a", "b"}), std::invalid_argument);
    CHECK_THROWS_AS(cohen_kappa({}, {}), std::invalid_argument);
}

TEST_CASE("cohen_kappa is symmetric on random label pairs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        std::vector<std::string> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
            b.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
        }
        CHECK(cohen_kappa(a, b) == doctest::Approx(cohen_kappa(b, a)));
    }
}

TEST_CASE("json render round-trips") {
    std::vector<PostScan> posts(3);
    posts[0] = {1, 2020, true, 5, 100, {"ECB"}, {128}};
    posts[1] = {2, 2021, false, 2, 50, {"GCM"}, {256}};
    posts[2] = {3, 2021, false, 0, 10, {}, {}};
    std::vector<Finding> findings = {confirmed("R-01", "1", Section::Question),
                                     confirmed("R-02-a", "2", Section::Question)};
    Finding review = confirmed("R-03-c", "3", Section::Question);
    review.status = FindingStatus::NeedsReview;
    findings.push_back(review);

    const auto r = build_report(findings, posts, helpers::catalog());
    const std::string rendered = render(r, Format::Json);
    const auto back = parse_report_json(rendered);

    CHECK(back.ruleset_version == r.ruleset_version);
    REQUIRE(back.tallies.size() == r.tallies.size());
    for (std::size_t i = 0; i < r.tallies.size(); ++i) {
        CHECK(back.tallies[i].rule_id == r.tallies[i].rule_id);
        CHECK(back.tallies[i].solved_posts == r.tallies[i].solved_posts);
        CHECK(back.tallies[i].pending_posts == r.tallies[i].pending_posts);
        CHECK(back.tallies[i].total_posts == r.tallies[i].total_posts);
        CHECK(back.tallies[i].total_findings == r.tallies[i].total_findings);
    }
    CHECK(back.posts_per_year == r.posts_per_year);
    CHECK(back.key_sizes_by_year == r.key_sizes_by_year);
    CHECK(back.needs_review_posts == r.needs_review_posts);
    CHECK(back.dismissed_posts == r.dismissed_posts);
    REQUIRE(back.mode_shares.size() == r.mode_shares.size());
    for (const auto& [year, s] : r.mode_shares) {
        CHECK(back.mode_shares.at(year).ecb == doctest::Approx(s.ecb));
        CHECK(back.mode_shares.at(year).gcm == doctest::Approx(s.gcm));
    }
    CHECK(back.corpus_meta.posts == r.corpus_meta.posts);
    CHECK(back.corpus_meta.solved == r.corpus_meta.solved);
    CHECK(back.corpus_meta.mean_views == doctest::Approx(r.corpus_meta.mean_views));
}

TEST_CASE("empty report renders zeroed tables in every format") {
    const auto r = build_report({}, {}, helpers::catalog());
    for (const auto format : {Format::Json, Format::Csv, Format::Markdown}) {
        const std::string out = render(r, format);
        CHECK(!out.empty());
    }
    const auto back = parse_report_json(render(r, Format::Json));
    REQUIRE(back.tallies.size() == 13);
    for (const auto& t : back.tallies) CHECK(t.total_posts == 0);
}

TEST_CASE("markdown mirrors the tally table with one row per rule") {
    const auto r = build_report({}, {}, helpers::catalog());
    const std::string md = render(r, Format::Markdown);
    for (const auto& rule : helpers::catalog().rules) {
        CHECK(md.find("| " + rule.id + " |") != std::string::npos);
    }
    CHECK(md.find("#Solved Posts") != std::string::npos);
}

TEST_CASE("manifest defines the post universe when supplied") {
    std::vector<PostScan> posts(1);
    posts[0] = {1, 2020, true, 5, 100, {"ECB"}, {}};
    const std::vector<corpus::ManifestEntry> manifest = {
        {1, 2020, 5, true}, {2, 2021, 0, false}};
    const auto r = build_report({}, posts, helpers::catalog(), &manifest);
    CHECK(r.corpus_meta.posts == 2);
    CHECK(r.corpus_meta.solved == 1);
    CHECK(r.corpus_meta.pending == 1);
    CHECK(r.posts_per_year.at(2021) == 1);
}
