#include "jcascan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <random>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "jcascan/textutil.hpp"

namespace jcascan::corpus {

namespace text = jcascan::text;

namespace {

// XML attribute-level unescaping: the five named entities plus numeric
// references. HTML entities inside post bodies survive one level down, which
// is exactly what the extractor expects.
std::string xml_unescape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] != '&') {
            out.push_back(raw[i++]);
            continue;
        }
        const auto semi = raw.find(';', i);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(raw[i++]);
            continue;
        }
        const std::string_view entity = raw.substr(i + 1, semi - i - 1);
        if (entity == "amp") out.push_back('&');
        else if (entity == "lt") out.push_back('<');
        else if (entity == "gt") out.push_back('>');
        else if (entity == "quot") out.push_back('"');
        else if (entity == "apos") out.push_back('\'');
        else if (!entity.empty() && entity[0] == '#') {
            unsigned long cp = 0;
            bool ok = false;
            if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
                for (std::size_t k = 2; k < entity.size(); ++k) {
                    const char c = entity[k];
                    if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    cp = cp * 16 + static_cast<unsigned long>(
                                       std::isdigit(static_cast<unsigned char>(c))
                                           ? c - '0'
                                           : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                    ok = true;
                }
            } else {
                for (std::size_t k = 1; k < entity.size(); ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(entity[k]))) { ok = false; break; }
                    cp = cp * 10 + static_cast<unsigned long>(entity[k] - '0');
                    ok = true;
                }
            }
            if (!ok) {
                out.push_back(raw[i++]);
                continue;
            }
            if (cp < 0x80) {
                out.push_back(static_cast<char>(cp));
            } else if (cp < 0x800) {
                out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else {
                out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            }
        } else {
            out.push_back(raw[i++]);
            continue;
        }
        i = semi + 1;
    }
    return out;
}

std::optional<long long> to_ll(std::string_view s) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

struct RawAttr {
    std::string_view name;
    std::string_view value;
};

// Parses name="value" pairs between `begin` and `end`. Returns false on
// syntax it cannot make sense of.
bool parse_attrs(std::string_view row, std::vector<RawAttr>& out) {
    std::size_t i = 0;
    const std::size_t n = row.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(row[i]))) ++i;
        if (i >= n) break;
        const std::size_t name_begin = i;
        while (i < n && (std::isalnum(static_cast<unsigned char>(row[i])) || row[i] == '_'))
            ++i;
        if (i == name_begin) return false;
        const std::string_view name = row.substr(name_begin, i - name_begin);
        while (i < n && std::isspace(static_cast<unsigned char>(row[i]))) ++i;
        if (i >= n || row[i] != '=') return false;
        ++i;
        while (i < n && std::isspace(static_cast<unsigned char>(row[i]))) ++i;
        if (i >= n || row[i] != '"') return false;
        ++i;
        const std::size_t val_begin = i;
        while (i < n && row[i] != '"') ++i;
        if (i >= n) return false;
        out.push_back({name, row.substr(val_begin, i - val_begin)});
        ++i;
    }
    return true;
}

std::vector<std::string> parse_tags(std::string_view escaped) {
    // Tags arrive as &lt;java&gt;&lt;aes&gt; inside the attribute.
    const std::string unescaped = xml_unescape(escaped);
    std::vector<std::string> tags;
    std::size_t i = 0;
    while (i < unescaped.size()) {
        if (unescaped[i] == '<') {
            const auto close = unescaped.find('>', i);
            if (close == std::string::npos) break;
            tags.push_back(unescaped.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            ++i;
        }
    }
    return tags;
}

} // namespace

struct PostStream::Impl {
    std::istream& in;
    std::string buf;
    std::size_t pos = 0;
    StreamStats stats;
    std::vector<Diagnostic> diags;
    bool truncated = false;
    bool eof = false;
    std::uint64_t row_ordinal = 0;

    static constexpr std::size_t CHUNK = 1 << 16;
    // A row larger than this is treated as malformed rather than buffered
    // without bound.
    static constexpr std::size_t MAX_ROW = 64u << 20;

    explicit Impl(std::istream& s) : in(s) {}

    void compact() {
        if (pos > 0) {
            buf.erase(0, pos);
            pos = 0;
        }
    }

    bool fill() {
        if (eof) return false;
        compact();
        const std::size_t old = buf.size();
        buf.resize(old + CHUNK);
        in.read(buf.data() + old, CHUNK);
        const std::size_t got = static_cast<std::size_t>(in.gcount());
        buf.resize(old + got);
        if (got == 0) eof = true;
        return got > 0;
    }

    // Scans from the member `pos` (the row start) for the closing '>'
    // outside quotes. fill() compacts the buffer, erasing everything before
    // pos, so scan offsets are adjusted after each refill. Returns the
    // offset just past '>' or npos when the stream ends first.
    std::size_t row_close() {
        std::size_t scan = pos;
        bool in_quote = false;
        while (true) {
            for (; scan < buf.size(); ++scan) {
                const char c = buf[scan];
                if (c == '"') in_quote = !in_quote;
                else if (c == '>' && !in_quote) return scan + 1;
            }
            if (buf.size() - pos > MAX_ROW) return std::string::npos;
            const std::size_t erased = pos;
            if (!fill()) return std::string::npos;
            scan -= erased;
        }
    }

    // True when buf[pos..] starts a real row element, with enough bytes
    // buffered to tell.
    bool looks_like_row() {
        while (pos + 4 >= buf.size() && !eof) {
            const std::size_t erased = pos;
            if (!fill()) break;
            (void)erased;
        }
        if (pos + 4 >= buf.size()) return true; // let the attr parser decide
        const char c = buf[pos + 4];
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/' || c == '>';
    }

    bool next_row(std::string_view& row_out) {
        while (true) {
            const auto at = buf.find("<row", pos);
            if (at == std::string::npos) {
                // Keep a small tail so a "<row" split across chunks survives.
                pos = buf.size() > 8 ? buf.size() - 8 : 0;
                if (!fill()) return false;
                continue;
            }
            pos = at;
            if (!looks_like_row()) {
                pos += 4;
                continue;
            }
            const std::size_t close = row_close();
            if (close == std::string::npos) {
                truncated = true;
                diags.push_back({"stream ends inside a row element", "", row_ordinal});
                pos = buf.size();
                return false;
            }
            row_out = std::string_view(buf).substr(pos, close - pos);
            pos = close;
            return true;
        }
    }
};

PostStream::PostStream(std::istream& in) : impl_(std::make_unique<Impl>(in)) {}
PostStream::~PostStream() = default;

const StreamStats& PostStream::stats() const { return impl_->stats; }
const std::vector<Diagnostic>& PostStream::diagnostics() const { return impl_->diags; }
bool PostStream::truncated() const { return impl_->truncated; }

bool PostStream::next(PostRecord& out) {
    std::string_view row;
    std::vector<RawAttr> attrs;
    while (impl_->next_row(row)) {
        ++impl_->row_ordinal;
        ++impl_->stats.rows;
        // Trim "<row" ... "/>" or ">".
        std::string_view inner = row.substr(4);
        if (inner.size() >= 2 && inner.substr(inner.size() - 2) == "/>")
            inner = inner.substr(0, inner.size() - 2);
        else if (!inner.empty() && inner.back() == '>')
            inner = inner.substr(0, inner.size() - 1);

        attrs.clear();
        if (!parse_attrs(inner, attrs)) {
            ++impl_->stats.malformed;
            impl_->diags.push_back({"malformed row skipped", "", impl_->row_ordinal});
            continue;
        }

        PostRecord rec;
        bool have_id = false, have_type = false;
        for (const auto& a : attrs) {
            if (a.name == "Id") {
                if (auto v = to_ll(a.value)) { rec.id = *v; have_id = true; }
            } else if (a.name == "PostTypeId") {
                if (auto v = to_ll(a.value)) { rec.post_type = static_cast<int>(*v); have_type = true; }
            } else if (a.name == "AcceptedAnswerId") {
                rec.accepted_answer_id = to_ll(a.value);
            } else if (a.name == "ParentId") {
                rec.parent_id = to_ll(a.value);
            } else if (a.name == "CreationDate") {
                rec.creation_date = std::string(a.value);
                if (a.value.size() >= 4)
                    if (auto y = to_ll(a.value.substr(0, 4))) rec.year = static_cast<int>(*y);
            } else if (a.name == "Score") {
                if (auto v = to_ll(a.value)) rec.score = static_cast<int>(*v);
            } else if (a.name == "ViewCount") {
                rec.view_count = to_ll(a.value);
            } else if (a.name == "Tags") {
                rec.tags = parse_tags(a.value);
            } else if (a.name == "Body") {
                rec.body = xml_unescape(a.value);
            }
        }
        if (!have_id || !have_type) {
            ++impl_->stats.malformed;
            impl_->diags.push_back({"row missing Id/PostTypeId skipped", "", impl_->row_ordinal});
            continue;
        }
        if (rec.post_type != 1 && rec.post_type != 2) {
            ++impl_->stats.skipped_type;
            continue;
        }
        if (rec.post_type == 1) ++impl_->stats.questions;
        else ++impl_->stats.answers;
        out = std::move(rec);
        return true;
    }
    return false;
}

std::vector<PostBundle> assemble_bundles(const std::vector<PostRecord>& records,
                                         std::vector<Diagnostic>* diags) {
    // Pass 1: questions and the answer ids they accept.
    std::vector<PostBundle> bundles;
    std::unordered_map<long long, std::size_t> by_question;
    for (const auto& r : records) {
        if (!r.is_question()) continue;
        PostBundle b;
        b.question = r;
        by_question[r.id] = bundles.size();
        bundles.push_back(std::move(b));
    }
    // Pass 2: attach accepted answers, count the rest.
    for (const auto& r : records) {
        if (!r.is_answer() || !r.parent_id) continue;
        auto it = by_question.find(*r.parent_id);
        if (it == by_question.end()) continue;
        PostBundle& b = bundles[it->second];
        if (b.question.accepted_answer_id && *b.question.accepted_answer_id == r.id) {
            b.accepted_answer = r;
            b.solved = true;
        } else {
            ++b.other_answer_count;
        }
    }
    for (auto& b : bundles) {
        if (b.question.accepted_answer_id && !b.accepted_answer) {
            if (diags)
                diags->push_back({"AcceptedAnswerId " +
                                      std::to_string(*b.question.accepted_answer_id) +
                                      " references a missing row",
                                  std::to_string(b.question.id), 0});
            b.solved = false;
        }
    }
    return bundles;
}

namespace {

const std::regex& filter_re() {
    // The corpus filter: symmetric-cipher getInstance with the quote either
    // literal or still entity-escaped. RC is a deliberate prefix match.
    static const std::regex re(
        R"re(Cipher\.getInstance\(\s*(?:"|&quot;?)\s*(?:AES|DESede|DES|RC|Blowfish|ChaCha20))re",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

} // namespace

bool body_matches_filter(std::string_view body) {
    // Cheap gate first; the regex only runs on plausible bodies.
    if (!text::icontains(body, "getinstance")) return false;
    return std::regex_search(body.begin(), body.end(), filter_re());
}

bool corpus_filter(const PostBundle& b) {
    if (body_matches_filter(b.question.body)) return true;
    if (b.accepted_answer && body_matches_filter(b.accepted_answer->body)) return true;
    return false;
}

std::string write_manifest(const std::vector<ManifestEntry>& entries) {
    std::ostringstream out;
    for (const auto& e : entries)
        out << e.id << '\t' << e.year << '\t' << e.score << '\t' << (e.solved ? 1 : 0)
            << '\n';
    return out.str();
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ManifestEntry e;
        int solved = 0;
        if (!(ls >> e.id >> e.year >> e.score >> solved))
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     " is malformed: " + line);
        e.solved = solved != 0;
        entries.push_back(e);
    }
    return entries;
}

std::vector<ManifestEntry> filter_posts(const StreamOpener& open, FilterStats* stats,
                                        std::vector<Diagnostic>* diags) {
    struct QuestionMeta {
        long long id;
        int year;
        int score;
        bool solved;
    };

    std::vector<ManifestEntry> matched;
    std::unordered_set<long long> matched_ids;
    // (accepted answer id, question meta) for questions that did not match by
    // body; sorted once, binary-searched in pass 2.
    std::vector<std::pair<long long, QuestionMeta>> pending_accepted;

    {
        auto in = open();
        if (!in || !*in) throw std::runtime_error("cannot open posts dump");
        PostStream stream(*in);
        PostRecord rec;
        while (stream.next(rec)) {
            if (!rec.is_question()) continue;
            const bool solved = rec.accepted_answer_id.has_value();
            if (body_matches_filter(rec.body)) {
                matched.push_back({rec.id, rec.year, rec.score, solved});
                matched_ids.insert(rec.id);
                if (stats) ++stats->matched_via_question;
            } else if (rec.accepted_answer_id) {
                pending_accepted.emplace_back(
                    *rec.accepted_answer_id,
                    QuestionMeta{rec.id, rec.year, rec.score, solved});
            }
        }
        if (stats) stats->stream = stream.stats();
        if (diags)
            diags->insert(diags->end(), stream.diagnostics().begin(),
                          stream.diagnostics().end());
    }

    std::sort(pending_accepted.begin(), pending_accepted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    {
        auto in = open();
        if (!in || !*in) throw std::runtime_error("cannot reopen posts dump");
        PostStream stream(*in);
        PostRecord rec;
        while (stream.next(rec)) {
            if (!rec.is_answer()) continue;
            const auto it = std::lower_bound(
                pending_accepted.begin(), pending_accepted.end(), rec.id,
                [](const auto& p, long long id) { return p.first < id; });
            if (it == pending_accepted.end() || it->first != rec.id) continue;
            if (matched_ids.count(it->second.id)) continue;
            if (body_matches_filter(rec.body)) {
                matched.push_back(
                    {it->second.id, it->second.year, it->second.score, it->second.solved});
                matched_ids.insert(it->second.id);
                if (stats) ++stats->matched_via_answer;
            }
        }
    }

    std::sort(matched.begin(), matched.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
    return matched;
}

namespace {

// Deterministic uniform index in [0, n); modulo bias is irrelevant here and
// the arithmetic is pinned across platforms, unlike std::shuffle.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

void pinned_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[bounded(rng, i)]);
}

struct SampleKeys {
    long long id;
    int year;
    int score;
};

std::vector<std::size_t> sample_indices(const std::vector<SampleKeys>& keys,
                                        std::size_t n, std::uint64_t seed,
                                        std::vector<Diagnostic>* diags,
                                        SampleStrata* strata) {
    if (n > keys.size())
        throw SampleError("sample size " + std::to_string(n) + " exceeds population " +
                          std::to_string(keys.size()));
    std::vector<std::size_t> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Canonical base order, so equal inputs sample equally however they
    // arrived.
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return keys[a].id < keys[b].id; });

    const std::size_t n_recent = n * 40 / 100;
    const std::size_t n_top = n * 30 / 100;
    const std::size_t n_rand = n - n_recent - n_top;

    std::mt19937_64 rng(seed);
    std::vector<bool> taken(keys.size(), false);
    std::vector<std::size_t> picked;
    std::size_t spill = 0;

    // Stratum 1: recent posts, uniform.
    {
        std::vector<std::size_t> pool;
        for (std::size_t i : order)
            if (keys[i].year >= 2020 && keys[i].year <= 2023) pool.push_back(i);
        pinned_shuffle(pool, rng);
        const std::size_t take = std::min(n_recent, pool.size());
        for (std::size_t k = 0; k < take; ++k) {
            picked.push_back(pool[k]);
            taken[pool[k]] = true;
        }
        if (strata) strata->recent = take;
        if (take < n_recent) {
            spill += n_recent - take;
            if (diags)
                diags->push_back({"recent stratum short by " +
                                      std::to_string(n_recent - take) +
                                      "; spilling into random stratum",
                                  "", 0});
        }
    }

    // Stratum 2: top scores, ties by ascending id.
    {
        std::vector<std::size_t> pool;
        for (std::size_t i : order)
            if (!taken[i]) pool.push_back(i);
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            if (keys[a].score != keys[b].score) return keys[a].score > keys[b].score;
            return keys[a].id < keys[b].id;
        });
        const std::size_t take = std::min(n_top, pool.size());
        for (std::size_t k = 0; k < take; ++k) {
            picked.push_back(pool[k]);
            taken[pool[k]] = true;
        }
        if (strata) strata->top_score = take;
        if (take < n_top) {
            spill += n_top - take;
            if (diags)
                diags->push_back({"top-score stratum short by " +
                                      std::to_string(n_top - take) +
                                      "; spilling into random stratum",
                                  "", 0});
        }
    }

    // Stratum 3: uniform remainder, absorbing any spill.
    {
        std::vector<std::size_t> pool;
        for (std::size_t i : order)
            if (!taken[i]) pool.push_back(i);
        pinned_shuffle(pool, rng);
        const std::size_t want = n_rand + spill;
        std::size_t took = 0;
        for (std::size_t k = 0; k < want && k < pool.size(); ++k) {
            picked.push_back(pool[k]);
            taken[pool[k]] = true;
            ++took;
        }
        if (strata) strata->random = took;
    }

    std::sort(picked.begin(), picked.end(),
              [&](std::size_t a, std::size_t b) { return keys[a].id < keys[b].id; });
    return picked;
}

} // namespace

std::vector<ManifestEntry> stratified_sample(const std::vector<ManifestEntry>& entries,
                                             std::size_t n, std::uint64_t seed,
                                             std::vector<Diagnostic>* diags,
                                             SampleStrata* strata) {
    std::vector<SampleKeys> keys;
    keys.reserve(entries.size());
    for (const auto& e : entries) keys.push_back({e.id, e.year, e.score});
    std::vector<ManifestEntry> out;
    for (std::size_t i : sample_indices(keys, n, seed, diags, strata)) out.push_back(entries[i]);
    return out;
}

std::vector<PostBundle> stratified_sample(const std::vector<PostBundle>& bundles,
                                          std::size_t n, std::uint64_t seed,
                                          std::vector<Diagnostic>* diags,
                                          SampleStrata* strata) {
    std::vector<SampleKeys> keys;
    keys.reserve(bundles.size());
    for (const auto& b : bundles) keys.push_back({b.question.id, b.question.year, b.question.score});
    std::vector<PostBundle> out;
    for (std::size_t i : sample_indices(keys, n, seed, diags, strata)) out.push_back(bundles[i]);
    return out;
}

} // namespace jcascan::corpus
