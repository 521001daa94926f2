// jcascan: scans code snippets, posts and data dumps for symmetric-encryption
// API misuses. Exit codes follow lint conventions: 0 clean, 1 confirmed
// findings, 2 usage error, 3 input error.

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jcascan/corpus.hpp"
#include "jcascan/engine.hpp"
#include "jcascan/extractor.hpp"
#include "jcascan/report.hpp"
#include "jcascan/resolver.hpp"
#include "jcascan/ruleset.hpp"

using json = nlohmann::ordered_json;
using namespace jcascan;

namespace {

constexpr int EXIT_FINDINGS = 1;
constexpr int EXIT_USAGE = 2;
constexpr int EXIT_INPUT = 3;

struct CliError {
    int code;
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{EXIT_INPUT, "cannot open " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{EXIT_INPUT, "cannot write " + path};
    out << content;
}

rules::RuleSet load_ruleset(const std::string& rules_path) {
    rules::RuleSet rs = rules::builtin_ruleset();
    if (!rules_path.empty()) {
        try {
            const auto cfg = rules::parse_override_config(read_file(rules_path));
            rs = rules::apply_overrides(rs, cfg);
        } catch (const rules::ConfigError& e) {
            throw CliError{EXIT_USAGE, std::string("rules config: ") + e.what()};
        }
    }
    return rs;
}

int env_jobs() {
    if (const char* env = std::getenv("JCASCAN_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::string env_format() {
    if (const char* env = std::getenv("JCASCAN_FORMAT")) return env;
    return "json";
}

report::Format parse_format(const std::string& name) {
    if (name == "json") return report::Format::Json;
    if (name == "csv") return report::Format::Csv;
    if (name == "markdown" || name == "md") return report::Format::Markdown;
    throw CliError{EXIT_USAGE, "unknown format '" + name + "' (expected json|csv|markdown)"};
}

// Ordered parallel map: scan units with up to `jobs` workers; results keep
// input order so output is canonical regardless of the job count.
std::vector<engine::ScanResult> scan_all(const engine::Scanner& scanner,
                                         const std::vector<SourceText>& units,
                                         const engine::ScanOptions& opts, int jobs) {
    std::vector<engine::ScanResult> results(units.size());
    if (jobs <= 1 || units.size() <= 1) {
        for (std::size_t i = 0; i < units.size(); ++i)
            results[i] = scanner.scan_text(units[i], opts);
        return results;
    }
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= units.size()) break;
            results[i] = scanner.scan_text(units[i], opts);
        }
    };
    std::vector<std::future<void>> futs;
    const int n = std::min<int>(jobs, static_cast<int>(units.size()));
    for (int i = 0; i < n; ++i) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
    return results;
}

json finding_to_json(const engine::Finding& f) {
    json j;
    j["rule"] = f.rule_id;
    j["severity"] = rules::severity_name(f.severity);
    j["status"] = engine::status_name(f.status);
    j["source"] = f.source_id;
    j["section"] = section_name(f.section);
    j["snippet"] = f.snippet_index;
    j["span"] = {f.span.begin, f.span.end};
    j["line"] = f.at.line;
    j["col"] = f.at.col;
    j["matched"] = f.matched_text;
    if (!f.matched_ident.empty()) j["ident"] = f.matched_ident;
    j["evidence"] = f.evidence;
    return j;
}

engine::Finding finding_from_json(const json& j) {
    engine::Finding f;
    f.rule_id = j.value("rule", "");
    f.severity = j.value("severity", "insecure") == std::string("bad_practice")
                     ? rules::Severity::BadPractice
                     : rules::Severity::Insecure;
    const std::string status = j.value("status", "needs_review");
    f.status = status == "confirmed"   ? engine::FindingStatus::Confirmed
               : status == "dismissed" ? engine::FindingStatus::Dismissed
                                       : engine::FindingStatus::NeedsReview;
    f.source_id = j.value("source", "");
    const std::string section = j.value("section", "standalone");
    f.section = section == "question"          ? Section::Question
                : section == "accepted_answer" ? Section::AcceptedAnswer
                : section == "other_answer"    ? Section::OtherAnswer
                                               : Section::Standalone;
    f.snippet_index = j.value("snippet", 0u);
    if (j.contains("span") && j["span"].is_array() && j["span"].size() == 2)
        f.span = {j["span"][0].get<std::size_t>(), j["span"][1].get<std::size_t>()};
    f.at = {j.value("line", std::size_t{1}), j.value("col", std::size_t{1})};
    f.matched_text = j.value("matched", "");
    f.matched_ident = j.value("ident", "");
    f.evidence = j.value("evidence", "");
    return f;
}

struct ScanDocument {
    std::vector<engine::Finding> findings;
    std::vector<report::PostScan> posts;
    std::vector<Diagnostic> diagnostics;
    std::string ruleset_version;
    bool strict_context = false;
};

std::string scan_document_to_json(const ScanDocument& doc) {
    json j;
    j["schema"] = "jcascan-findings/1";
    j["ruleset_version"] = doc.ruleset_version;
    j["strict_context"] = doc.strict_context;
    json posts = json::array();
    for (const auto& p : doc.posts) {
        posts.push_back({{"id", p.id},
                         {"year", p.year},
                         {"solved", p.solved},
                         {"score", p.score},
                         {"views", p.views},
                         {"aes_modes", p.aes_modes},
                         {"key_bits", p.key_bits}});
    }
    j["posts"] = std::move(posts);
    json findings = json::array();
    for (const auto& f : doc.findings) findings.push_back(finding_to_json(f));
    j["findings"] = std::move(findings);
    json diags = json::array();
    for (const auto& d : doc.diagnostics)
        diags.push_back({{"message", d.message}, {"source", d.source_id}, {"where", d.where}});
    j["diagnostics"] = std::move(diags);
    return j.dump(2) + "\n";
}

ScanDocument scan_document_from_json(const std::string& content) {
    ScanDocument doc;
    json j;
    try {
        j = json::parse(content);
    } catch (const std::exception& e) {
        throw CliError{EXIT_INPUT, std::string("findings file is not valid JSON: ") + e.what()};
    }
    doc.ruleset_version = j.value("ruleset_version", "");
    doc.strict_context = j.value("strict_context", false);
    for (const auto& p : j.value("posts", json::array())) {
        report::PostScan ps;
        ps.id = p.value("id", 0LL);
        ps.year = p.value("year", 0);
        ps.solved = p.value("solved", false);
        ps.score = p.value("score", 0);
        ps.views = p.value("views", 0LL);
        for (const auto& m : p.value("aes_modes", json::array()))
            ps.aes_modes.push_back(m.get<std::string>());
        for (const auto& b : p.value("key_bits", json::array()))
            ps.key_bits.push_back(b.get<int>());
        doc.posts.push_back(std::move(ps));
    }
    for (const auto& f : j.value("findings", json::array()))
        doc.findings.push_back(finding_from_json(f));
    return doc;
}

// --------------------------------------------------------------------------
// scan over a posts dump

struct DumpScanConfig {
    std::string dump_path;
    std::string manifest_path; // optional: restrict to these ids
    engine::ScanOptions opts;
    int jobs = 1;
};

ScanDocument scan_dump(const engine::Scanner& scanner, const DumpScanConfig& cfg) {
    ScanDocument doc;
    doc.ruleset_version = scanner.ruleset().version;
    doc.strict_context = cfg.opts.strict_context;

    std::vector<corpus::ManifestEntry> wanted;
    if (!cfg.manifest_path.empty()) {
        std::ifstream in(cfg.manifest_path);
        if (!in) throw CliError{EXIT_INPUT, "cannot open manifest " + cfg.manifest_path};
        try {
            wanted = corpus::read_manifest(in);
        } catch (const std::exception& e) {
            throw CliError{EXIT_INPUT, e.what()};
        }
    } else {
        const auto opener = [&]() -> std::unique_ptr<std::istream> {
            return std::make_unique<std::ifstream>(cfg.dump_path, std::ios::binary);
        };
        try {
            corpus::FilterStats stats;
            wanted = corpus::filter_posts(opener, &stats, &doc.diagnostics);
        } catch (const std::exception& e) {
            throw CliError{EXIT_INPUT, e.what()};
        }
    }

    std::map<long long, corpus::ManifestEntry> wanted_by_id;
    for (const auto& e : wanted) wanted_by_id[e.id] = e;

    // Pass A: matched question bodies; remember which answers are accepted.
    std::vector<SourceText> units;
    std::map<long long, report::PostScan> post_scans;
    std::map<long long, long long> wanted_answers; // answer id -> question id
    {
        std::ifstream in(cfg.dump_path, std::ios::binary);
        if (!in) throw CliError{EXIT_INPUT, "cannot open dump " + cfg.dump_path};
        corpus::PostStream stream(in);
        corpus::PostRecord rec;
        while (stream.next(rec)) {
            if (!rec.is_question()) continue;
            const auto it = wanted_by_id.find(rec.id);
            if (it == wanted_by_id.end()) continue;
            report::PostScan ps;
            ps.id = rec.id;
            ps.year = it->second.year ? it->second.year : rec.year;
            ps.score = rec.score;
            ps.solved = it->second.solved;
            ps.views = rec.view_count.value_or(0);
            post_scans[rec.id] = std::move(ps);
            SourceText body;
            body.raw = rec.body;
            body.origin = Origin::HtmlPost;
            body.section = Section::Question;
            body.source_id = std::to_string(rec.id);
            units.push_back(std::move(body));
            if (rec.accepted_answer_id) wanted_answers[*rec.accepted_answer_id] = rec.id;
        }
    }
    // Pass B: accepted-answer bodies of matched posts.
    {
        std::ifstream in(cfg.dump_path, std::ios::binary);
        if (!in) throw CliError{EXIT_INPUT, "cannot reopen dump " + cfg.dump_path};
        corpus::PostStream stream(in);
        corpus::PostRecord rec;
        while (stream.next(rec)) {
            if (!rec.is_answer()) continue;
            const auto it = wanted_answers.find(rec.id);
            if (it == wanted_answers.end()) continue;
            SourceText body;
            body.raw = rec.body;
            body.origin = Origin::HtmlPost;
            body.section = Section::AcceptedAnswer;
            body.source_id = std::to_string(it->second);
            units.push_back(std::move(body));
        }
    }

    const auto results = scan_all(scanner, units, cfg.opts, cfg.jobs);
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& r = results[i];
        doc.findings.insert(doc.findings.end(), r.findings.begin(), r.findings.end());
        doc.diagnostics.insert(doc.diagnostics.end(), r.diagnostics.begin(),
                               r.diagnostics.end());
        const long long id = std::stoll(units[i].source_id);
        auto it = post_scans.find(id);
        if (it != post_scans.end()) {
            it->second.aes_modes.insert(it->second.aes_modes.end(), r.aes_modes.begin(),
                                        r.aes_modes.end());
            it->second.key_bits.insert(it->second.key_bits.end(), r.key_bits.begin(),
                                       r.key_bits.end());
        }
    }
    for (auto& [id, ps] : post_scans) doc.posts.push_back(std::move(ps));

    std::stable_sort(doc.findings.begin(), doc.findings.end(),
                     [](const engine::Finding& a, const engine::Finding& b) {
                         const long long ia = std::stoll(a.source_id);
                         const long long ib = std::stoll(b.source_id);
                         if (ia != ib) return ia < ib;
                         if (a.section != b.section)
                             return static_cast<int>(a.section) < static_cast<int>(b.section);
                         if (a.snippet_index != b.snippet_index)
                             return a.snippet_index < b.snippet_index;
                         return a.span.begin < b.span.begin;
                     });
    return doc;
}

int count_confirmed(const std::vector<engine::Finding>& findings) {
    int n = 0;
    for (const auto& f : findings)
        if (f.status == engine::FindingStatus::Confirmed) ++n;
    return n;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scanner for symmetric-encryption API misuses in code snippets and Q&A dumps"};
    app.require_subcommand(1);

    // filter
    std::string filter_dump, filter_out;
    auto* cmd_filter = app.add_subcommand("filter", "Filter a Posts dump into a corpus manifest");
    cmd_filter->add_option("dump", filter_dump, "Posts XML dump")->required();
    cmd_filter->add_option("-o,--output", filter_out, "Manifest output path (default stdout)");

    // sample
    std::string sample_manifest, sample_out;
    std::size_t sample_n = 0;
    std::uint64_t sample_seed = 0;
    auto* cmd_sample = app.add_subcommand("sample", "Draw the stratified 40/30/30 sample");
    cmd_sample->add_option("manifest", sample_manifest, "Manifest from `filter`")->required();
    cmd_sample->add_option("-n,--size", sample_n, "Sample size")->required();
    cmd_sample->add_option("--seed", sample_seed, "RNG seed")->required();
    cmd_sample->add_option("-o,--output", sample_out, "Sampled manifest output (default stdout)");

    // scan
    std::vector<std::string> scan_paths;
    std::string scan_dump_path, scan_manifest_path, scan_rules, scan_out;
    bool scan_strict = false;
    int scan_jobs = env_jobs();
    auto* cmd_scan = app.add_subcommand("scan", "Scan files or a dump; write findings JSON");
    cmd_scan->add_option("paths", scan_paths, "Source files to scan");
    cmd_scan->add_option("--dump", scan_dump_path, "Posts XML dump to scan");
    cmd_scan->add_option("--manifest", scan_manifest_path,
                         "Restrict a dump scan to the posts in this manifest");
    cmd_scan->add_option("--rules", scan_rules, "Rule override config");
    cmd_scan->add_flag("--strict-context", scan_strict,
                       "Confirm constant matches even when unused in key derivation");
    cmd_scan->add_option("--jobs", scan_jobs, "Parallel scan workers");
    cmd_scan->add_option("-o,--output", scan_out, "Findings output path (default stdout)");

    // audit
    std::string audit_path, audit_rules;
    bool audit_strict = false, audit_fail_on_review = false, audit_verbose = false;
    auto* cmd_audit = app.add_subcommand("audit", "Audit one captured answer (fenced text)");
    cmd_audit->add_option("file", audit_path, "Text file with the answer")->required();
    cmd_audit->add_option("--rules", audit_rules, "Rule override config");
    cmd_audit->add_flag("--strict-context", audit_strict);
    cmd_audit->add_flag("--fail-on-review", audit_fail_on_review,
                        "Exit 1 when needs-review findings remain");
    cmd_audit->add_flag("-v,--verbose", audit_verbose, "Include dismissed findings");

    // report
    std::string report_findings, report_manifest, report_out;
    std::string report_format = env_format();
    bool report_timestamp = false;
    auto* cmd_report = app.add_subcommand("report", "Aggregate findings into the violation report");
    cmd_report->add_option("findings", report_findings, "Findings JSON from `scan`")->required();
    cmd_report->add_option("manifest", report_manifest, "Corpus manifest (optional)");
    cmd_report->add_option("--format", report_format, "json|csv|markdown");
    cmd_report->add_option("-o,--output", report_out, "Output path (default stdout)");
    cmd_report->add_flag("--timestamp", report_timestamp,
                         "Stamp the report with the current UTC time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            (void)app.exit(e);
            return 0; // --help
        }
        std::cerr << e.what() << "\n";
        return EXIT_USAGE;
    }

    try {
        if (*cmd_filter) {
            const auto opener = [&]() -> std::unique_ptr<std::istream> {
                return std::make_unique<std::ifstream>(filter_dump, std::ios::binary);
            };
            corpus::FilterStats stats;
            std::vector<Diagnostic> diags;
            std::vector<corpus::ManifestEntry> entries;
            try {
                entries = corpus::filter_posts(opener, &stats, &diags);
            } catch (const std::exception& e) {
                throw CliError{EXIT_INPUT, e.what()};
            }
            for (const auto& d : diags) std::cerr << "warning: " << d.message << "\n";
            write_output(filter_out, corpus::write_manifest(entries));
            std::cerr << "filter: " << entries.size() << " of " << stats.stream.questions
                      << " questions retained (" << stats.matched_via_question
                      << " via question, " << stats.matched_via_answer
                      << " via accepted answer)\n";
            return 0;
        }

        if (*cmd_sample) {
            std::ifstream in(sample_manifest);
            if (!in) throw CliError{EXIT_INPUT, "cannot open manifest " + sample_manifest};
            std::vector<corpus::ManifestEntry> entries;
            try {
                entries = corpus::read_manifest(in);
            } catch (const std::exception& e) {
                throw CliError{EXIT_INPUT, e.what()};
            }
            std::vector<Diagnostic> diags;
            std::vector<corpus::ManifestEntry> sampled;
            try {
                sampled = corpus::stratified_sample(entries, sample_n, sample_seed, &diags);
            } catch (const corpus::SampleError& e) {
                throw CliError{EXIT_USAGE, e.what()};
            }
            for (const auto& d : diags) std::cerr << "warning: " << d.message << "\n";
            write_output(sample_out, corpus::write_manifest(sampled));
            return 0;
        }

        if (*cmd_scan) {
            const rules::RuleSet rs = load_ruleset(scan_rules);
            const engine::Scanner scanner(rs);
            engine::ScanOptions opts;
            opts.strict_context = scan_strict;

            if (!scan_dump_path.empty() && !scan_paths.empty())
                throw CliError{EXIT_USAGE, "scan: give either source files or --dump, not both"};

            ScanDocument doc;
            if (!scan_dump_path.empty()) {
                DumpScanConfig cfg;
                cfg.dump_path = scan_dump_path;
                cfg.manifest_path = scan_manifest_path;
                cfg.opts = opts;
                cfg.jobs = scan_jobs;
                doc = scan_dump(scanner, cfg);
            } else {
                if (scan_paths.empty())
                    throw CliError{EXIT_USAGE, "scan: give source files or --dump"};
                doc.ruleset_version = rs.version;
                doc.strict_context = opts.strict_context;
                std::vector<SourceText> units;
                for (const auto& path : scan_paths) {
                    SourceText body;
                    body.raw = read_file(path);
                    body.origin = Origin::PlainFile;
                    body.section = Section::Standalone;
                    body.source_id = path;
                    units.push_back(std::move(body));
                }
                const auto results = scan_all(scanner, units, opts, scan_jobs);
                for (const auto& r : results) {
                    doc.findings.insert(doc.findings.end(), r.findings.begin(),
                                        r.findings.end());
                    doc.diagnostics.insert(doc.diagnostics.end(), r.diagnostics.begin(),
                                           r.diagnostics.end());
                }
            }
            write_output(scan_out, scan_document_to_json(doc));
            return count_confirmed(doc.findings) > 0 ? EXIT_FINDINGS : 0;
        }

        if (*cmd_audit) {
            const rules::RuleSet rs = load_ruleset(audit_rules);
            const engine::Scanner scanner(rs);
            engine::ScanOptions opts;
            opts.strict_context = audit_strict;

            SourceText body;
            body.raw = read_file(audit_path);
            body.origin = Origin::FencedText;
            body.section = Section::Standalone;
            body.source_id = audit_path;
            const auto result = scanner.scan_text(body, opts);

            // Assemble first, write once: no partial output on error.
            std::ostringstream out;
            int confirmed = 0, review = 0, dismissed = 0;
            for (const auto& f : result.findings) {
                if (f.status == engine::FindingStatus::Dismissed) {
                    ++dismissed;
                    if (!audit_verbose) continue;
                } else if (f.status == engine::FindingStatus::Confirmed) {
                    ++confirmed;
                } else {
                    ++review;
                }
                out << audit_path << ':' << f.at.line << ':' << f.at.col << ": "
                    << f.rule_id << " [" << rules::severity_name(f.severity) << "] "
                    << engine::status_name(f.status);
                const rules::Rule* rule = rs.find(f.rule_id);
                if (rule) out << " - " << rule->description;
                out << '\n';
                if (!f.evidence.empty()) out << "    evidence: " << f.evidence << '\n';
            }
            out << confirmed << " confirmed, " << review << " needs review, " << dismissed
                << " dismissed\n";
            for (const auto& d : result.diagnostics)
                std::cerr << "warning: " << d.message << "\n";
            std::cout << out.str();
            if (confirmed > 0) return EXIT_FINDINGS;
            if (audit_fail_on_review && review > 0) return EXIT_FINDINGS;
            return 0;
        }

        if (*cmd_report) {
            const report::Format format = parse_format(report_format);
            const ScanDocument doc = scan_document_from_json(read_file(report_findings));
            std::optional<std::vector<corpus::ManifestEntry>> manifest;
            if (!report_manifest.empty()) {
                std::ifstream in(report_manifest);
                if (!in) throw CliError{EXIT_INPUT, "cannot open manifest " + report_manifest};
                try {
                    manifest = corpus::read_manifest(in);
                } catch (const std::exception& e) {
                    throw CliError{EXIT_INPUT, e.what()};
                }
            }
            const rules::RuleSet rs = rules::builtin_ruleset();
            report::ViolationReport vr;
            try {
                vr = report::build_report(doc.findings, doc.posts, rs,
                                          manifest ? &*manifest : nullptr);
            } catch (const report::AggregationError& e) {
                throw CliError{EXIT_INPUT, e.what()};
            }
            if (report_timestamp) {
                char stamp[32];
                const std::time_t now = std::time(nullptr);
                std::tm tm_utc{};
                gmtime_r(&now, &tm_utc);
                std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
                vr.generated_at = stamp;
            }
            write_output(report_out, report::render(vr, format));
            return 0;
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_INPUT;
    }
    return EXIT_USAGE;
}
