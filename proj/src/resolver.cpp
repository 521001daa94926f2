#include "jcascan/resolver.hpp"

#include <cctype>
#include <regex>

#include "jcascan/textutil.hpp"

namespace jcascan::resolve {

namespace text = jcascan::text;

const char* binding_kind_name(BindingKind k) {
    switch (k) {
    case BindingKind::StringLit: return "string_lit";
    case BindingKind::IntLit: return "int_lit";
    case BindingKind::ByteArray: return "byte_array";
    case BindingKind::CharArray: return "char_array";
    case BindingKind::NullLit: return "null_lit";
    case BindingKind::ExprUnknown: return "expr_unknown";
    }
    return "unknown";
}

Binding BindingEnv::lookup(const std::string& identifier) const {
    auto it = bindings.find(identifier);
    if (it != bindings.end()) return it->second;
    Binding b;
    b.identifier = identifier;
    b.kind = BindingKind::ExprUnknown;
    return b;
}

namespace {

std::size_t count_array_elems(std::string_view inner) {
    inner = text::trim(inner);
    if (inner.empty()) return 0;
    std::size_t count = 0;
    std::size_t elem_begin = 0;
    int depth = 0;
    bool in_string = false, in_char = false;
    const auto close_elem = [&](std::size_t end) {
        if (!text::trim(inner.substr(elem_begin, end - elem_begin)).empty()) ++count;
    };
    for (std::size_t i = 0; i < inner.size(); ++i) {
        const char c = inner[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (in_char) {
            if (c == '\\') ++i;
            else if (c == '\'') in_char = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '\'') in_char = true;
        else if (c == '(' || c == '[' || c == '{') ++depth;
        else if (c == ')' || c == ']' || c == '}') --depth;
        else if (c == ',' && depth == 0) {
            close_elem(i);
            elem_begin = i + 1;
        }
    }
    close_elem(inner.size()); // a trailing comma adds no element
    return count;
}

const std::regex& string_lit_re() {
    static const std::regex re(R"re(^"((?:[^"\\]|\\.)*)"$)re");
    return re;
}

const std::regex& char_array_from_lit_re() {
    static const std::regex re(R"re(^"((?:[^"\\]|\\.)*)"\s*\.\s*toCharArray\s*\(\s*\)$)re");
    return re;
}

const std::regex& bytes_from_lit_re() {
    static const std::regex re(R"re(^"((?:[^"\\]|\\.)*)"\s*\.\s*getBytes\s*\([^)]*\)$)re");
    return re;
}

const std::regex& new_sized_byte_array_re() {
    static const std::regex re(R"re(^new\s+byte\s*\[\s*(\d+)\s*\]$)re");
    return re;
}

const std::regex& new_byte_array_init_re() {
    static const std::regex re(R"re(^new\s+byte\s*\[\s*\]\s*\{([\s\S]*)\}$)re");
    return re;
}

const std::regex& new_char_array_init_re() {
    static const std::regex re(R"re(^new\s+char\s*\[\s*\]\s*\{([\s\S]*)\}$)re");
    return re;
}

const std::regex& bare_array_init_re() {
    static const std::regex re(R"re(^\{([\s\S]*)\}$)re");
    return re;
}

const std::regex& int_lit_re() {
    static const std::regex re(R"re(^-?\d+[lL]?$)re");
    return re;
}

const std::regex& char_lit_re() {
    static const std::regex re(R"re(^'(\\?[^'])'$)re");
    return re;
}

Binding parse_rhs(std::string ident, std::string_view rhs) {
    Binding b;
    b.identifier = std::move(ident);
    b.kind = BindingKind::ExprUnknown;
    const std::string expr(text::trim(rhs));
    std::smatch m;

    if (std::regex_match(expr, m, string_lit_re())) {
        b.kind = BindingKind::StringLit;
        b.text_value = m[1].str();
        b.bit_length = 8 * text::java_literal_byte_length(b.text_value);
    } else if (std::regex_match(expr, m, char_array_from_lit_re())) {
        b.kind = BindingKind::CharArray;
        b.text_value = m[1].str();
        b.bit_length = 8 * text::java_literal_byte_length(b.text_value);
    } else if (std::regex_match(expr, m, char_lit_re())) {
        b.kind = BindingKind::StringLit;
        b.text_value = m[1].str();
        b.bit_length = 8;
    } else if (std::regex_match(expr, m, int_lit_re())) {
        b.kind = BindingKind::IntLit;
        std::string digits = expr;
        if (!digits.empty() && (digits.back() == 'l' || digits.back() == 'L'))
            digits.pop_back();
        b.int_value = std::stoll(digits);
    } else if (expr == "null") {
        b.kind = BindingKind::NullLit;
    } else if (std::regex_match(expr, m, new_sized_byte_array_re())) {
        b.kind = BindingKind::ByteArray;
        b.bit_length = 8 * static_cast<std::size_t>(std::stoull(m[1].str()));
    } else if (std::regex_match(expr, m, new_byte_array_init_re())) {
        b.kind = BindingKind::ByteArray;
        b.text_value = m[1].str();
        b.bit_length = 8 * count_array_elems(m[1].str());
    } else if (std::regex_match(expr, m, new_char_array_init_re())) {
        b.kind = BindingKind::CharArray;
        b.text_value = m[1].str();
        b.bit_length = 8 * count_array_elems(m[1].str());
    } else if (std::regex_match(expr, m, bare_array_init_re())) {
        // `byte[] iv = {..}` — only arrays admit this initializer in Java.
        b.kind = BindingKind::ByteArray;
        b.text_value = m[1].str();
        b.bit_length = 8 * count_array_elems(m[1].str());
    }
    return b;
}

bool is_typeish(std::string_view s) {
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
              c == '[' || c == ']' || c == '<' || c == '>' || c == ',' || c == '.' ||
              std::isspace(static_cast<unsigned char>(c))))
            return false;
    }
    return true;
}

// Offset of the first top-level simple '=' in a statement, or npos. Skips
// ==, <=, >=, !=, and compound assignments.
std::size_t find_assign_eq(std::string_view stmt) {
    bool in_string = false, in_char = false;
    for (std::size_t i = 0; i < stmt.size(); ++i) {
        const char c = stmt[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (in_char) {
            if (c == '\\') ++i;
            else if (c == '\'') in_char = false;
            continue;
        }
        if (c == '"') { in_string = true; continue; }
        if (c == '\'') { in_char = true; continue; }
        if (c != '=') continue;
        const char prev = i > 0 ? stmt[i - 1] : '\0';
        const char next = i + 1 < stmt.size() ? stmt[i + 1] : '\0';
        if (next == '=') { ++i; continue; }
        if (prev == '=' || prev == '!' || prev == '<' || prev == '>' || prev == '+' ||
            prev == '-' || prev == '*' || prev == '/' || prev == '%' || prev == '&' ||
            prev == '|' || prev == '^')
            continue;
        return i;
    }
    return std::string_view::npos;
}

// Last identifier token in the left-hand side of an assignment.
std::string lhs_identifier(std::string_view lhs) {
    lhs = text::trim(lhs);
    std::size_t end = lhs.size();
    while (end > 0 && !text::is_ident_char(lhs[end - 1])) {
        // allow "salt[]" style declarators
        if (lhs[end - 1] == ']' || lhs[end - 1] == '[' ||
            std::isspace(static_cast<unsigned char>(lhs[end - 1])))
            --end;
        else
            return {};
    }
    std::size_t begin = end;
    while (begin > 0 && text::is_ident_char(lhs[begin - 1])) --begin;
    if (begin == end) return {};
    std::string ident(lhs.substr(begin, end - begin));
    if (!text::is_ident_start(ident[0])) return {};
    return ident;
}

void collect_from_text(std::string_view body, BindingEnv& env) {
    std::size_t stmt_begin = 0;
    bool in_string = false, in_char = false;
    // Braces open either a code block (statement separator) or an array
    // initializer (part of the statement); a small stack tells them apart.
    std::vector<bool> brace_is_array;
    const auto handle = [&](std::string_view stmt) {
        stmt = text::trim(stmt);
        if (stmt.empty()) return;
        const std::size_t eq = find_assign_eq(stmt);
        if (eq == std::string_view::npos) return;
        const auto lhs = stmt.substr(0, eq);
        if (!is_typeish(lhs)) return;
        const std::string ident = lhs_identifier(lhs);
        if (ident.empty()) return;
        env.bindings[ident] = parse_rhs(ident, stmt.substr(eq + 1));
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (in_char) {
            if (c == '\\') ++i;
            else if (c == '\'') in_char = false;
            continue;
        }
        if (c == '"') { in_string = true; continue; }
        if (c == '\'') { in_char = true; continue; }
        if (c == '{') {
            std::size_t j = i;
            while (j > 0 && std::isspace(static_cast<unsigned char>(body[j - 1]))) --j;
            const bool array_init =
                j > 0 && (body[j - 1] == '=' || body[j - 1] == ']' || body[j - 1] == ',' ||
                          body[j - 1] == '{' || body[j - 1] == '(');
            brace_is_array.push_back(array_init);
            if (!array_init) {
                handle(body.substr(stmt_begin, i - stmt_begin));
                stmt_begin = i + 1;
            }
            continue;
        }
        if (c == '}') {
            const bool array_init = !brace_is_array.empty() && brace_is_array.back();
            if (!brace_is_array.empty()) brace_is_array.pop_back();
            if (!array_init) {
                handle(body.substr(stmt_begin, i - stmt_begin));
                stmt_begin = i + 1;
            }
            continue;
        }
        if (c == ';' || c == '\n') {
            // Newlines inside an array initializer do not end the statement.
            if (c == '\n' && !brace_is_array.empty() && brace_is_array.back()) continue;
            handle(body.substr(stmt_begin, i - stmt_begin));
            stmt_begin = i + 1;
        }
    }
    handle(body.substr(stmt_begin));
}

} // namespace

namespace {

const char* const DERIVATION_HINTS[] = {"pbe",  "key",  "digest",  "cipher", "deriv",
                                        "kdf",  "hash", "encrypt", "decrypt"};

bool derivation_callee(std::string_view callee) {
    for (const char* hint : DERIVATION_HINTS)
        if (text::icontains(callee, hint)) return true;
    return false;
}

// One pass over the section: note every resolvable iteration count handed to
// a derivation call, and every identifier that flows into one.
void index_derivation_calls(BindingEnv& env) {
    static const std::regex call_re(R"re(([A-Za-z_$][A-Za-z0-9_$]*)\s*\()re");
    for (const auto& body : env.texts) {
        for (auto it = std::sregex_iterator(body.begin(), body.end(), call_re);
             it != std::sregex_iterator(); ++it) {
            const std::string callee = (*it)[1].str();
            if (!derivation_callee(callee)) continue;
            const std::size_t paren =
                static_cast<std::size_t>(it->position(0)) + it->length(0) - 1;
            const auto args = text::split_call_args(body, paren);
            if (!args) continue;

            const bool keyspec = text::icontains(callee, "PBEKeySpec");
            const bool paramspec = text::icontains(callee, "PBEParameterSpec");
            if (keyspec || paramspec) {
                const std::size_t idx = keyspec ? 2 : 1;
                if (args->size() > idx)
                    if (const auto v = resolve_int((*args)[idx].text, env))
                        env.derivation_iterations.push_back(*v);
            }
            for (const auto& a : *args) {
                // Every whole identifier inside the argument list.
                std::size_t i = 0;
                while (i < a.text.size()) {
                    if (!text::is_ident_start(a.text[i])) {
                        ++i;
                        continue;
                    }
                    std::size_t j = i;
                    while (j < a.text.size() && text::is_ident_char(a.text[j])) ++j;
                    env.idents_in_derivation_calls.insert(std::string(a.text.substr(i, j - i)));
                    i = j;
                }
            }
        }
    }
}

} // namespace

BindingEnv collect_bindings(const std::vector<Snippet>& snippets) {
    BindingEnv env;
    if (!snippets.empty()) env.section = snippets.front().section;
    for (const auto& sn : snippets) {
        env.texts.push_back(sn.text);
        collect_from_text(sn.text, env);
    }
    index_derivation_calls(env);
    return env;
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty() || !text::is_ident_start(s[0])) return false;
    for (char c : s)
        if (!text::is_ident_char(c)) return false;
    return true;
}

// Identifiers may contain '$', which is regex syntax; escape before
// embedding them in a pattern.
std::string regex_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '$' || c == '\\' || c == '.' || c == '^' || c == '[' || c == ']' ||
            c == '(' || c == ')' || c == '{' || c == '}' || c == '*' || c == '+' ||
            c == '?' || c == '|')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace

std::optional<std::size_t> resolve_bit_length(std::string_view expr, const BindingEnv& env) {
    const std::string e(text::trim(expr));
    std::smatch m;
    if (std::regex_match(e, m, string_lit_re()) ||
        std::regex_match(e, m, char_array_from_lit_re()) ||
        std::regex_match(e, m, bytes_from_lit_re()))
        return 8 * text::java_literal_byte_length(m[1].str());
    if (std::regex_match(e, m, char_lit_re())) return 8;
    if (std::regex_match(e, m, new_sized_byte_array_re()))
        return 8 * static_cast<std::size_t>(std::stoull(m[1].str()));
    if (std::regex_match(e, m, new_byte_array_init_re()) ||
        std::regex_match(e, m, new_char_array_init_re()) ||
        std::regex_match(e, m, bare_array_init_re()))
        return 8 * count_array_elems(m[1].str());
    if (is_identifier(e)) {
        const Binding b = env.lookup(e);
        if (b.bit_length) return b.bit_length;
    }
    // `salt.getBytes()` style: resolve the receiver.
    static const std::regex ident_bytes(
        R"re(^([A-Za-z_$][A-Za-z0-9_$]*)\s*\.\s*(?:getBytes|toCharArray)\s*\([^)]*\)$)re");
    if (std::regex_match(e, m, ident_bytes)) {
        const Binding b = env.lookup(m[1].str());
        if (b.bit_length) return b.bit_length;
    }
    return std::nullopt;
}

std::optional<long long> resolve_int(std::string_view expr, const BindingEnv& env) {
    const std::string e(text::trim(expr));
    if (std::regex_match(e, int_lit_re())) {
        std::string digits = e;
        if (!digits.empty() && (digits.back() == 'l' || digits.back() == 'L'))
            digits.pop_back();
        try {
            return std::stoll(digits);
        } catch (...) {
            return std::nullopt;
        }
    }
    if (is_identifier(e)) {
        const Binding b = env.lookup(e);
        if (b.kind == BindingKind::IntLit) return b.int_value;
    }
    return std::nullopt;
}

bool resolves_to_constant(std::string_view expr, const BindingEnv& env) {
    const std::string e(text::trim(expr));
    std::smatch m;
    if (std::regex_match(e, string_lit_re()) ||
        std::regex_match(e, char_array_from_lit_re()) ||
        std::regex_match(e, bytes_from_lit_re()) ||
        std::regex_match(e, char_lit_re()) ||
        std::regex_match(e, new_byte_array_init_re()) ||
        std::regex_match(e, new_char_array_init_re()) ||
        std::regex_match(e, bare_array_init_re()) ||
        std::regex_match(e, int_lit_re()))
        return true;
    std::string ident;
    if (is_identifier(e)) {
        ident = e;
    } else {
        static const std::regex ident_conv(
            R"re(^([A-Za-z_$][A-Za-z0-9_$]*)\s*\.\s*(?:getBytes|toCharArray)\s*\([^)]*\)$)re");
        if (std::regex_match(e, m, ident_conv)) ident = m[1].str();
    }
    if (!ident.empty()) {
        const Binding b = env.lookup(ident);
        return b.kind == BindingKind::StringLit || b.kind == BindingKind::CharArray ||
               b.kind == BindingKind::ByteArray || b.kind == BindingKind::IntLit;
    }
    return false;
}

bool is_null_literal(std::string_view expr, const BindingEnv& env) {
    const std::string e(text::trim(expr));
    if (e == "null") return true;
    if (is_identifier(e)) return env.lookup(e).kind == BindingKind::NullLit;
    return false;
}

namespace {

using engine::Finding;
using engine::FindingStatus;

Finding with_status(Finding f, FindingStatus st, std::string evidence) {
    f.status = st;
    if (!evidence.empty()) {
        if (!f.evidence.empty()) f.evidence += "; ";
        f.evidence += evidence;
    }
    return f;
}

// Locates `callee(` inside the matched text and returns the parsed argument
// list, positions relative to the snippet.
std::optional<std::vector<text::CallArg>> call_args_at(const Finding& f,
                                                       const Snippet& sn,
                                                       std::string_view callee) {
    const std::string lowered = text::to_lower(f.matched_text);
    const std::string want = text::to_lower(std::string(callee));
    const auto at = lowered.find(want);
    if (at == std::string::npos) return std::nullopt;
    const auto paren = f.matched_text.find('(', at);
    if (paren == std::string::npos) return std::nullopt;
    return text::split_call_args(sn.text, f.span.begin + paren);
}

// Construction expression for an identifier, searched across the section:
// collects the class name and argument list of the last `x = new C(..)`.
struct Construction {
    std::string class_name;
    std::string args;
    bool found = false;
};

Construction find_construction(const std::string& ident, const BindingEnv& env) {
    Construction out;
    const std::regex re("(?:^|[^A-Za-z0-9_$])" + regex_escape(ident) +
                            R"re(\s*=\s*new\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\(([^)]*)\))re",
                        std::regex::ECMAScript);
    for (const auto& body : env.texts) {
        for (auto it = std::sregex_iterator(body.begin(), body.end(), re);
             it != std::sregex_iterator(); ++it) {
            out.class_name = (*it)[1].str();
            out.args = (*it)[2].str();
            out.found = true;
        }
    }
    return out;
}

bool find_set_seed(const std::string& ident, const BindingEnv& env, std::string* seed_expr) {
    const std::regex re("(?:^|[^A-Za-z0-9_$])" + regex_escape(ident) +
                        R"re(\s*\.\s*setSeed\s*\(([^)]*)\))re");
    for (const auto& body : env.texts) {
        std::smatch m;
        if (std::regex_search(body, m, re)) {
            *seed_expr = m[1].str();
            return true;
        }
    }
    return false;
}

bool is_crypto_rng(std::string_view cls) {
    return text::icontains(cls, "securerandom");
}

bool is_plain_rng(std::string_view cls) {
    const std::string c = text::to_lower(cls);
    return c == "random" || c == "threadlocalrandom" || c == "splittablerandom";
}

Finding confirm_salt_length(const Finding& f, const BindingEnv& env, const Snippet& sn) {
    std::optional<std::size_t> bits;
    if (text::icontains(f.matched_text, "PBEKeySpec")) {
        if (auto args = call_args_at(f, sn, "PBEKeySpec"); args && args->size() >= 2)
            bits = resolve_bit_length((*args)[1].text, env);
    } else if (text::icontains(f.matched_text, "PBEParameterSpec")) {
        if (auto args = call_args_at(f, sn, "PBEParameterSpec"); args && !args->empty())
            bits = resolve_bit_length((*args)[0].text, env);
    } else if (!f.matched_ident.empty()) {
        const Binding b = env.lookup(f.matched_ident);
        bits = b.bit_length;
    }
    if (!bits)
        return with_status(f, FindingStatus::NeedsReview, "salt size unresolved");
    if (*bits < 64)
        return with_status(f, FindingStatus::Confirmed,
                           "salt=" + std::to_string(*bits) + " bits (<64)");
    return with_status(f, FindingStatus::Dismissed,
                       "salt=" + std::to_string(*bits) + " bits");
}

Finding confirm_iteration_count(const Finding& f, const BindingEnv& env, const Snippet& sn) {
    std::optional<long long> iters;
    if (text::icontains(f.matched_text, "PBEKeySpec")) {
        if (auto args = call_args_at(f, sn, "PBEKeySpec"); args && args->size() >= 3)
            iters = resolve_int((*args)[2].text, env);
    } else if (text::icontains(f.matched_text, "PBEParameterSpec")) {
        if (auto args = call_args_at(f, sn, "PBEParameterSpec"); args && args->size() >= 2)
            iters = resolve_int((*args)[1].text, env);
    } else {
        // Salt-assignment site: fall back on the iteration counts the
        // section's derivation calls were indexed with.
        for (long long v : env.derivation_iterations)
            if (!iters || v < *iters) iters = v;
    }
    if (!iters)
        return with_status(f, FindingStatus::NeedsReview, "iteration count unresolved");
    if (*iters < 1000)
        return with_status(f, FindingStatus::Confirmed,
                           "iterations=" + std::to_string(*iters));
    return with_status(f, FindingStatus::Dismissed,
                       "iterations=" + std::to_string(*iters) + " (>=1000)");
}

Finding confirm_random_source(const Finding& f, const BindingEnv& env, const Snippet& sn) {
    auto args = call_args_at(f, sn, ".init");
    if (!args || args->size() < 2)
        return with_status(f, FindingStatus::NeedsReview, "random argument not found");
    const std::string rnd((*args)[1].text);

    std::string cls, ctor_args;
    static const std::regex inline_new(
        R"re(^new\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\(([^)]*)\)$)re");
    std::smatch m;
    if (std::regex_match(rnd, m, inline_new)) {
        cls = m[1].str();
        ctor_args = m[2].str();
    } else if (is_identifier(rnd)) {
        const Construction c = find_construction(rnd, env);
        if (c.found) {
            cls = c.class_name;
            ctor_args = c.args;
        }
        std::string seed;
        if (is_crypto_rng(cls) && find_set_seed(rnd, env, &seed) &&
            resolves_to_constant(seed, env))
            return with_status(f, FindingStatus::Confirmed,
                               "SecureRandom reseeded with constant");
    }
    if (cls.empty())
        return with_status(f, FindingStatus::NeedsReview, "random source unresolved");
    if (is_plain_rng(cls))
        return with_status(f, FindingStatus::Confirmed,
                           "non-cryptographic generator " + cls);
    if (is_crypto_rng(cls)) {
        const auto trimmed = text::trim(ctor_args);
        if (trimmed.empty())
            return with_status(f, FindingStatus::Dismissed, "unseeded SecureRandom");
        if (resolves_to_constant(trimmed, env))
            return with_status(f, FindingStatus::Confirmed,
                               "SecureRandom seeded with constant");
        return with_status(f, FindingStatus::NeedsReview,
                           "SecureRandom seed unresolved");
    }
    return with_status(f, FindingStatus::NeedsReview, "unknown generator " + cls);
}

Finding confirm_keystore_password(const Finding& f, const BindingEnv& env, const Snippet& sn) {
    auto args = call_args_at(f, sn, ".load");
    if (!args || args->size() < 2)
        return with_status(f, FindingStatus::NeedsReview, "password argument missing");
    const std::string pwd((*args)[1].text);
    if (is_null_literal(pwd, env))
        return with_status(f, FindingStatus::Dismissed, "null keystore password");
    if (resolves_to_constant(pwd, env))
        return with_status(f, FindingStatus::Confirmed, "constant keystore password");
    return with_status(f, FindingStatus::NeedsReview, "keystore password unresolved");
}

// Does the identifier feed a key-derivation-ish call anywhere in the section?
bool used_in_derivation(const std::string& ident, const BindingEnv& env) {
    return env.idents_in_derivation_calls.count(ident) > 0;
}

Finding confirm_constant_value(const Finding& f, const BindingEnv& env,
                               const Snippet& sn, const ConfirmOptions& opts) {
    // R-04-b: a non-literal IvParameterSpec argument.
    if (f.rule_id == "R-04-b") {
        if (f.matched_ident.empty())
            return with_status(f, FindingStatus::NeedsReview, "IV argument not resolved");
        const Binding b = env.lookup(f.matched_ident);
        if (b.kind == BindingKind::ByteArray && !b.text_value.empty())
            return with_status(f, FindingStatus::Confirmed, "IV resolves to a constant array");
        if (b.kind == BindingKind::StringLit || b.kind == BindingKind::CharArray)
            return with_status(f, FindingStatus::Confirmed, "IV resolves to a constant literal");
        // Filled from a random source?
        const std::regex fill_re(
            R"re(([A-Za-z_$][A-Za-z0-9_$]*)\s*\.\s*nextBytes\s*\(\s*)re" +
            regex_escape(f.matched_ident) + R"re(\s*\))re");
        for (const auto& body : env.texts) {
            std::smatch m;
            if (!std::regex_search(body, m, fill_re)) continue;
            const Construction c = find_construction(m[1].str(), env);
            if (c.found && is_crypto_rng(c.class_name))
                return with_status(f, FindingStatus::Dismissed, "IV filled from SecureRandom");
            if (c.found && is_plain_rng(c.class_name))
                return with_status(f, FindingStatus::Confirmed,
                                   "IV filled from non-cryptographic " + c.class_name);
        }
        return with_status(f, FindingStatus::NeedsReview, "IV derivation unresolved");
    }

    // The remaining constant-value rules match a literal at the site itself.
    const bool usage_checked = f.rule_id == "R-03-b" || f.rule_id == "R-03-e";
    if (!usage_checked || opts.strict_context)
        return with_status(f, FindingStatus::Confirmed, "constant value at site");

    // Call-site alternatives (PBEKeySpec("..., PBEParameterSpec(") are
    // key-derivation uses by definition.
    if (text::icontains(f.matched_text, "PBEKeySpec") ||
        text::icontains(f.matched_text, "PBEParameterSpec"))
        return with_status(f, FindingStatus::Confirmed, "constant inside derivation call");

    if (f.matched_ident.empty())
        return with_status(f, FindingStatus::Confirmed, "constant value at site");
    if (used_in_derivation(f.matched_ident, env))
        return with_status(f, FindingStatus::Confirmed,
                           "constant '" + f.matched_ident + "' used in key derivation");
    (void)sn;
    return with_status(f, FindingStatus::Dismissed,
                       "constant '" + f.matched_ident + "' not used in key derivation");
}

} // namespace

engine::Finding confirm(const engine::Finding& f, rules::ConfirmKind kind,
                        const BindingEnv& env, const Snippet& sn,
                        const ConfirmOptions& opts) {
    switch (kind) {
    case rules::ConfirmKind::None:
        throw std::invalid_argument("confirm() called for an automatic rule: " + f.rule_id);
    case rules::ConfirmKind::SaltLength:
        return confirm_salt_length(f, env, sn);
    case rules::ConfirmKind::IterationCount:
        return confirm_iteration_count(f, env, sn);
    case rules::ConfirmKind::RandomSource:
        return confirm_random_source(f, env, sn);
    case rules::ConfirmKind::KeystorePassword:
        return confirm_keystore_password(f, env, sn);
    case rules::ConfirmKind::ConstantValue:
        return confirm_constant_value(f, env, sn, opts);
    }
    return f;
}

} // namespace jcascan::resolve
