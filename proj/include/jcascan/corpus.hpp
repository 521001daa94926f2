#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jcascan/types.hpp"

namespace jcascan::corpus {

struct PostRecord {
    long long id = 0;
    int post_type = 0; // 1 = question, 2 = answer
    std::optional<long long> accepted_answer_id;
    std::optional<long long> parent_id;
    std::string creation_date;
    int year = 0;
    int score = 0;
    std::optional<long long> view_count;
    std::vector<std::string> tags;
    std::string body; // HTML, entity-escaped content preserved

    bool is_question() const { return post_type == 1; }
    bool is_answer() const { return post_type == 2; }
};

struct PostBundle {
    PostRecord question;
    std::optional<PostRecord> accepted_answer;
    int other_answer_count = 0;
    bool solved = false;
};

struct StreamStats {
    std::uint64_t rows = 0;
    std::uint64_t questions = 0;
    std::uint64_t answers = 0;
    std::uint64_t skipped_type = 0; // PostTypeId outside {1,2}
    std::uint64_t malformed = 0;
};

// Pull-parser over a Posts dump: <posts> of self-closing <row .../> elements.
// Memory stays bounded by the largest single row. Malformed rows are skipped
// with a diagnostic; a stream that ends mid-row sets truncated().
class PostStream {
public:
    explicit PostStream(std::istream& in);
    ~PostStream();
    PostStream(const PostStream&) = delete;
    PostStream& operator=(const PostStream&) = delete;

    bool next(PostRecord& out);
    const StreamStats& stats() const;
    const std::vector<Diagnostic>& diagnostics() const;
    bool truncated() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// In-memory bundle assembly, two passes over the records. A question whose
// AcceptedAnswerId points at a missing row comes back solved=false with a
// dangling-reference diagnostic.
std::vector<PostBundle> assemble_bundles(const std::vector<PostRecord>& records,
                                         std::vector<Diagnostic>* diags = nullptr);

// The corpus filter: a symmetric-cipher getInstance call in the question or
// accepted-answer body. Works on raw (&quot;) and unescaped bodies alike.
bool body_matches_filter(std::string_view body);
bool corpus_filter(const PostBundle& b);

struct ManifestEntry {
    long long id = 0;
    int year = 0;
    int score = 0;
    bool solved = false;
};

// Manifest: one tab-separated record per bundle: id, year, score, solved.
std::string write_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(std::istream& in); // throws on bad lines

struct FilterStats {
    StreamStats stream;
    std::uint64_t matched_via_question = 0;
    std::uint64_t matched_via_answer = 0;
};

using StreamOpener = std::function<std::unique_ptr<std::istream>()>;

// Streaming corpus filter over a dump readable twice (pass 1: question
// bodies + accepted-answer ids, pass 2: accepted-answer bodies). Keeps only
// ids and small metadata in memory.
std::vector<ManifestEntry> filter_posts(const StreamOpener& open,
                                        FilterStats* stats = nullptr,
                                        std::vector<Diagnostic>* diags = nullptr);

struct SampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SampleStrata {
    std::size_t recent = 0;
    std::size_t top_score = 0;
    std::size_t random = 0;
};

// Deterministic 40/30/30 stratified sample: recent (2020-2023), top-score
// (ties by id ascending), uniform remainder. Strata are disjoint; a short
// stratum spills into the random one with a diagnostic. Throws SampleError
// when n exceeds the population. Result is sorted by id.
std::vector<ManifestEntry> stratified_sample(const std::vector<ManifestEntry>& entries,
                                             std::size_t n, std::uint64_t seed,
                                             std::vector<Diagnostic>* diags = nullptr,
                                             SampleStrata* strata = nullptr);
std::vector<PostBundle> stratified_sample(const std::vector<PostBundle>& bundles,
                                          std::size_t n, std::uint64_t seed,
                                          std::vector<Diagnostic>* diags = nullptr,
                                          SampleStrata* strata = nullptr);

} // namespace jcascan::corpus
