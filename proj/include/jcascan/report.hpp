#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "jcascan/corpus.hpp"
#include "jcascan/engine.hpp"
#include "jcascan/ruleset.hpp"

namespace jcascan::report {

struct RuleTally {
    std::string rule_id;
    long long solved_posts = 0;
    long long pending_posts = 0;
    long long total_posts = 0;   // solved + pending
    long long total_findings = 0; // confirmed findings, >= total_posts
};

struct ModeShare {
    double ecb = 0, cbc = 0, gcm = 0, other = 0;
};

struct CorpusMeta {
    long long posts = 0;
    long long solved = 0;
    long long pending = 0;
    double mean_score = 0;
    double mean_views = 0; // averaged over questions
};

// Scan-derived record for one post: what report aggregation needs.
struct PostScan {
    long long id = 0;
    int year = 0;
    bool solved = false;
    int score = 0;
    long long views = 0;
    std::vector<std::string> aes_modes; // "ECB"/"CBC"/"GCM"/"other"
    std::vector<int> key_bits;
};

struct ViolationReport {
    std::vector<RuleTally> tallies; // catalog order
    std::map<int, long long> posts_per_year;
    std::map<int, ModeShare> mode_shares;
    std::map<int, std::map<int, long long>> key_sizes_by_year;
    std::map<std::string, long long> needs_review_posts;
    std::map<std::string, long long> dismissed_posts;
    CorpusMeta corpus_meta;
    std::string ruleset_version;
    std::string generated_at; // empty unless the caller pins a timestamp
};

struct AggregationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A post counts toward a rule iff it has at least one confirmed finding of
// that rule in its question or accepted answer. Findings whose source id has
// no bundle raise AggregationError naming the id.
std::vector<RuleTally> tally_by_rule(const std::vector<engine::Finding>& findings,
                                     const std::vector<corpus::PostBundle>& bundles,
                                     const rules::RuleSet& catalog);
std::vector<RuleTally> tally_by_rule(const std::vector<engine::Finding>& findings,
                                     const std::vector<PostScan>& posts,
                                     const rules::RuleSet& catalog);

// Per-year AES mode shares under post-mentions counting: a post contributes
// once to every distinct mode category it uses that year; shares normalize
// to 1 per year.
std::map<int, ModeShare> mode_share_by_year(const std::vector<PostScan>& posts);

std::map<int, long long> posts_per_year(const std::vector<PostScan>& posts);
std::map<int, long long> posts_per_year(const std::vector<corpus::PostBundle>& bundles);

// Chance-corrected inter-annotator agreement. Throws std::invalid_argument
// on empty or length-mismatched input. Returns 1 for identical sequences
// even when chance agreement is 1.
double cohen_kappa(const std::vector<std::string>& a,
                   const std::vector<std::string>& b);

ViolationReport build_report(const std::vector<engine::Finding>& findings,
                             const std::vector<PostScan>& posts,
                             const rules::RuleSet& catalog,
                             const std::vector<corpus::ManifestEntry>* manifest = nullptr);

enum class Format { Json, Csv, Markdown };

std::string render(const ViolationReport& r, Format format);

// Inverse of render(r, Format::Json).
ViolationReport parse_report_json(const std::string& text);

} // namespace jcascan::report
