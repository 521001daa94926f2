#include "jcascan/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace jcascan::report {

using engine::Finding;
using engine::FindingStatus;
using json = nlohmann::ordered_json;

namespace {

struct PostFacts {
    bool solved = false;
    bool known = false;
};

std::vector<RuleTally> tally_core(const std::vector<Finding>& findings,
                                  const std::map<std::string, PostFacts>& posts,
                                  const rules::RuleSet& catalog) {
    // (rule, post) pairs, deduped: a post counts once per rule no matter how
    // many confirmed findings it has.
    std::map<std::string, std::set<std::string>> posts_by_rule;
    std::map<std::string, long long> findings_by_rule;

    for (const auto& f : findings) {
        if (f.status != FindingStatus::Confirmed) continue;
        if (f.section != Section::Question && f.section != Section::AcceptedAnswer &&
            f.section != Section::Standalone)
            continue;
        const auto it = posts.find(f.source_id);
        if (it == posts.end() || !it->second.known)
            throw AggregationError("finding references unknown source id " + f.source_id);
        posts_by_rule[f.rule_id].insert(f.source_id);
        ++findings_by_rule[f.rule_id];
    }

    std::vector<RuleTally> tallies;
    std::set<std::string> emitted;
    const auto emit = [&](const std::string& rule_id) {
        RuleTally t;
        t.rule_id = rule_id;
        const auto pit = posts_by_rule.find(rule_id);
        if (pit != posts_by_rule.end()) {
            for (const auto& source : pit->second) {
                const bool solved = posts.at(source).solved;
                if (solved) ++t.solved_posts;
                else ++t.pending_posts;
            }
        }
        t.total_posts = t.solved_posts + t.pending_posts;
        const auto fit = findings_by_rule.find(rule_id);
        t.total_findings = fit == findings_by_rule.end() ? 0 : fit->second;
        tallies.push_back(std::move(t));
        emitted.insert(rule_id);
    };

    for (const auto& r : catalog.rules) emit(r.id);
    for (const auto& [rule_id, unused] : posts_by_rule)
        if (!emitted.count(rule_id)) emit(rule_id);
    return tallies;
}

std::map<std::string, PostFacts> facts_from_bundles(const std::vector<corpus::PostBundle>& bundles) {
    std::map<std::string, PostFacts> facts;
    for (const auto& b : bundles)
        facts[std::to_string(b.question.id)] = {b.solved, true};
    return facts;
}

std::map<std::string, PostFacts> facts_from_posts(const std::vector<PostScan>& posts) {
    std::map<std::string, PostFacts> facts;
    for (const auto& p : posts) facts[std::to_string(p.id)] = {p.solved, true};
    return facts;
}

} // namespace

std::vector<RuleTally> tally_by_rule(const std::vector<Finding>& findings,
                                     const std::vector<corpus::PostBundle>& bundles,
                                     const rules::RuleSet& catalog) {
    return tally_core(findings, facts_from_bundles(bundles), catalog);
}

std::vector<RuleTally> tally_by_rule(const std::vector<Finding>& findings,
                                     const std::vector<PostScan>& posts,
                                     const rules::RuleSet& catalog) {
    return tally_core(findings, facts_from_posts(posts), catalog);
}

std::map<int, ModeShare> mode_share_by_year(const std::vector<PostScan>& posts) {
    struct Counts {
        long long ecb = 0, cbc = 0, gcm = 0, other = 0;
        long long total() const { return ecb + cbc + gcm + other; }
    };
    std::map<int, Counts> counts;
    for (const auto& p : posts) {
        if (p.aes_modes.empty()) continue;
        std::set<std::string> distinct(p.aes_modes.begin(), p.aes_modes.end());
        Counts& c = counts[p.year];
        for (const auto& m : distinct) {
            if (m == "ECB") ++c.ecb;
            else if (m == "CBC") ++c.cbc;
            else if (m == "GCM") ++c.gcm;
            else ++c.other;
        }
    }
    std::map<int, ModeShare> shares;
    for (const auto& [year, c] : counts) {
        const double total = static_cast<double>(c.total());
        if (total <= 0) continue;
        shares[year] = {c.ecb / total, c.cbc / total, c.gcm / total, c.other / total};
    }
    return shares;
}

std::map<int, long long> posts_per_year(const std::vector<PostScan>& posts) {
    std::map<int, long long> by_year;
    for (const auto& p : posts) ++by_year[p.year];
    return by_year;
}

std::map<int, long long> posts_per_year(const std::vector<corpus::PostBundle>& bundles) {
    std::map<int, long long> by_year;
    for (const auto& b : bundles) ++by_year[b.question.year];
    return by_year;
}

double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("cohen_kappa: label sequences must be non-empty and equal length");
    const double n = static_cast<double>(a.size());
    std::size_t agree = 0;
    std::map<std::string, std::size_t> freq_a, freq_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++agree;
        ++freq_a[a[i]];
        ++freq_b[b[i]];
    }
    const double p_o = agree / n;
    double p_e = 0;
    for (const auto& [label, fa] : freq_a) {
        const auto it = freq_b.find(label);
        if (it != freq_b.end()) p_e += (fa / n) * (it->second / n);
    }
    if (std::abs(1.0 - p_e) < 1e-12) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

ViolationReport build_report(const std::vector<Finding>& findings,
                             const std::vector<PostScan>& posts,
                             const rules::RuleSet& catalog,
                             const std::vector<corpus::ManifestEntry>* manifest) {
    ViolationReport r;
    r.ruleset_version = catalog.version;

    // The manifest, when present, defines the post universe; scan-derived
    // records fill in what it lacks (views, modes, key sizes).
    std::vector<PostScan> universe = posts;
    if (manifest) {
        std::map<long long, const PostScan*> by_id;
        for (const auto& p : posts) by_id[p.id] = &p;
        universe.clear();
        for (const auto& e : *manifest) {
            PostScan p;
            const auto it = by_id.find(e.id);
            if (it != by_id.end()) p = *it->second;
            p.id = e.id;
            p.year = e.year;
            p.score = e.score;
            p.solved = e.solved;
            universe.push_back(std::move(p));
        }
    }

    r.tallies = tally_by_rule(findings, universe, catalog);
    r.posts_per_year = posts_per_year(universe);
    r.mode_shares = mode_share_by_year(universe);

    for (const auto& p : universe) {
        std::set<int> distinct(p.key_bits.begin(), p.key_bits.end());
        for (int bits : distinct) ++r.key_sizes_by_year[p.year][bits];
    }

    std::map<std::string, std::set<std::string>> review_posts, dismissed_posts;
    for (const auto& f : findings) {
        if (f.status == FindingStatus::NeedsReview)
            review_posts[f.rule_id].insert(f.source_id);
        else if (f.status == FindingStatus::Dismissed)
            dismissed_posts[f.rule_id].insert(f.source_id);
    }
    for (const auto& [rule, ids] : review_posts)
        r.needs_review_posts[rule] = static_cast<long long>(ids.size());
    for (const auto& [rule, ids] : dismissed_posts)
        r.dismissed_posts[rule] = static_cast<long long>(ids.size());

    r.corpus_meta.posts = static_cast<long long>(universe.size());
    long long score_sum = 0, view_sum = 0;
    for (const auto& p : universe) {
        if (p.solved) ++r.corpus_meta.solved;
        else ++r.corpus_meta.pending;
        score_sum += p.score;
        view_sum += p.views;
    }
    if (!universe.empty()) {
        r.corpus_meta.mean_score = static_cast<double>(score_sum) / universe.size();
        r.corpus_meta.mean_views = static_cast<double>(view_sum) / universe.size();
    }
    return r;
}

namespace {

json to_json(const ViolationReport& r) {
    json j;
    j["schema"] = "jcascan-report/1";
    j["ruleset_version"] = r.ruleset_version;
    j["generated_at"] = r.generated_at;
    j["corpus"] = {{"posts", r.corpus_meta.posts},
                   {"solved", r.corpus_meta.solved},
                   {"pending", r.corpus_meta.pending},
                   {"mean_score", r.corpus_meta.mean_score},
                   {"mean_views", r.corpus_meta.mean_views}};
    json tallies = json::array();
    for (const auto& t : r.tallies) {
        tallies.push_back({{"rule", t.rule_id},
                           {"solved_posts", t.solved_posts},
                           {"pending_posts", t.pending_posts},
                           {"total_posts", t.total_posts},
                           {"total_findings", t.total_findings}});
    }
    j["violations"] = std::move(tallies);
    json years = json::object();
    for (const auto& [year, count] : r.posts_per_year)
        years[std::to_string(year)] = count;
    j["posts_per_year"] = std::move(years);
    json shares = json::object();
    for (const auto& [year, s] : r.mode_shares)
        shares[std::to_string(year)] = {
            {"ecb", s.ecb}, {"cbc", s.cbc}, {"gcm", s.gcm}, {"other", s.other}};
    j["aes_mode_shares"] = std::move(shares);
    json keysizes = json::object();
    for (const auto& [year, bits_map] : r.key_sizes_by_year) {
        json per_year = json::object();
        for (const auto& [bits, count] : bits_map)
            per_year[std::to_string(bits)] = count;
        keysizes[std::to_string(year)] = std::move(per_year);
    }
    j["key_sizes_by_year"] = std::move(keysizes);
    json review = json::object();
    for (const auto& [rule, count] : r.needs_review_posts) review[rule] = count;
    j["needs_review_posts"] = std::move(review);
    json dismissed = json::object();
    for (const auto& [rule, count] : r.dismissed_posts) dismissed[rule] = count;
    j["dismissed_posts"] = std::move(dismissed);
    return j;
}

std::string format_share(double v) {
    std::ostringstream out;
    out.precision(4);
    out << std::fixed << v;
    return out.str();
}

std::string render_markdown(const ViolationReport& r) {
    std::ostringstream out;
    out << "# Violation report\n\n";
    out << "Posts: " << r.corpus_meta.posts << " (" << r.corpus_meta.solved
        << " solved, " << r.corpus_meta.pending << " pending)\n\n";
    out << "| Rule-ID | #Solved Posts | #Pending Posts | #Total |\n";
    out << "|---------|---------------|----------------|--------|\n";
    for (const auto& t : r.tallies)
        out << "| " << t.rule_id << " | " << t.solved_posts << " | " << t.pending_posts
            << " | " << t.total_posts << " |\n";
    if (!r.posts_per_year.empty()) {
        out << "\n## Posts per year\n\n| Year | Posts |\n|------|-------|\n";
        for (const auto& [year, count] : r.posts_per_year)
            out << "| " << year << " | " << count << " |\n";
    }
    if (!r.mode_shares.empty()) {
        out << "\n## AES mode share per year\n\n| Year | ECB | CBC | GCM | Other |\n"
            << "|------|-----|-----|-----|-------|\n";
        for (const auto& [year, s] : r.mode_shares)
            out << "| " << year << " | " << format_share(s.ecb) << " | "
                << format_share(s.cbc) << " | " << format_share(s.gcm) << " | "
                << format_share(s.other) << " |\n";
    }
    return out.str();
}

std::string render_csv(const ViolationReport& r) {
    std::ostringstream out;
    out << "section,rule,solved_posts,pending_posts,total_posts,total_findings\n";
    for (const auto& t : r.tallies)
        out << "violations," << t.rule_id << ',' << t.solved_posts << ','
            << t.pending_posts << ',' << t.total_posts << ',' << t.total_findings << '\n';
    out << "\nsection,year,posts\n";
    for (const auto& [year, count] : r.posts_per_year)
        out << "posts_per_year," << year << ',' << count << '\n';
    out << "\nsection,year,ecb,cbc,gcm,other\n";
    for (const auto& [year, s] : r.mode_shares)
        out << "aes_mode_shares," << year << ',' << format_share(s.ecb) << ','
            << format_share(s.cbc) << ',' << format_share(s.gcm) << ','
            << format_share(s.other) << '\n';
    out << "\nsection,year,key_bits,posts\n";
    for (const auto& [year, bits_map] : r.key_sizes_by_year)
        for (const auto& [bits, count] : bits_map)
            out << "key_sizes," << year << ',' << bits << ',' << count << '\n';
    return out.str();
}

} // namespace

std::string render(const ViolationReport& r, Format format) {
    switch (format) {
    case Format::Json: return to_json(r).dump(2) + "\n";
    case Format::Csv: return render_csv(r);
    case Format::Markdown: return render_markdown(r);
    }
    throw std::invalid_argument("unknown report format");
}

ViolationReport parse_report_json(const std::string& content) {
    const json j = json::parse(content);
    ViolationReport r;
    r.ruleset_version = j.value("ruleset_version", "");
    r.generated_at = j.value("generated_at", "");
    if (j.contains("corpus")) {
        const auto& c = j["corpus"];
        r.corpus_meta.posts = c.value("posts", 0LL);
        r.corpus_meta.solved = c.value("solved", 0LL);
        r.corpus_meta.pending = c.value("pending", 0LL);
        r.corpus_meta.mean_score = c.value("mean_score", 0.0);
        r.corpus_meta.mean_views = c.value("mean_views", 0.0);
    }
    for (const auto& t : j.value("violations", json::array())) {
        RuleTally tally;
        tally.rule_id = t.value("rule", "");
        tally.solved_posts = t.value("solved_posts", 0LL);
        tally.pending_posts = t.value("pending_posts", 0LL);
        tally.total_posts = t.value("total_posts", 0LL);
        tally.total_findings = t.value("total_findings", 0LL);
        r.tallies.push_back(std::move(tally));
    }
    if (j.contains("posts_per_year"))
        for (const auto& [year, count] : j["posts_per_year"].items())
            r.posts_per_year[std::stoi(year)] = count.get<long long>();
    if (j.contains("aes_mode_shares"))
        for (const auto& [year, s] : j["aes_mode_shares"].items())
            r.mode_shares[std::stoi(year)] = {s.value("ecb", 0.0), s.value("cbc", 0.0),
                                              s.value("gcm", 0.0), s.value("other", 0.0)};
    if (j.contains("key_sizes_by_year"))
        for (const auto& [year, bits_map] : j["key_sizes_by_year"].items())
            for (const auto& [bits, count] : bits_map.items())
                r.key_sizes_by_year[std::stoi(year)][std::stoi(bits)] =
                    count.get<long long>();
    if (j.contains("needs_review_posts"))
        for (const auto& [rule, count] : j["needs_review_posts"].items())
            r.needs_review_posts[rule] = count.get<long long>();
    if (j.contains("dismissed_posts"))
        for (const auto& [rule, count] : j["dismissed_posts"].items())
            r.dismissed_posts[rule] = count.get<long long>();
    return r;
}

} // namespace jcascan::report
