#include "jcascan/textutil.hpp"

#include <cctype>

namespace jcascan::text {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    const auto lower = [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    };
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        std::size_t j = 0;
        while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
        if (j == needle.size()) return true;
    }
    return false;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::vector<std::string> ident_words(std::string_view ident) {
    std::vector<std::string> words;
    std::string cur;
    const auto flush = [&] {
        if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < ident.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(ident[i]);
        if (!std::isalpha(c)) {
            flush();
            continue;
        }
        if (!cur.empty()) {
            const unsigned char prev = static_cast<unsigned char>(cur.back());
            const bool lower_to_upper = std::islower(prev) && std::isupper(c);
            // "HTTPKey": break an upper run before its last capital when a
            // lower-case letter follows.
            const bool acronym_end = std::isupper(prev) && std::isupper(c) &&
                                     i + 1 < ident.size() &&
                                     std::islower(static_cast<unsigned char>(ident[i + 1]));
            if (lower_to_upper || acronym_end) flush();
        }
        cur.push_back(static_cast<char>(c));
    }
    flush();
    return words;
}

namespace {

// Last alphabetic character position, ignoring trailing digits/'_'/'$'.
std::string_view strip_trailing_nonalpha(std::string_view ident) {
    std::size_t end = ident.size();
    while (end > 0 && !std::isalpha(static_cast<unsigned char>(ident[end - 1]))) --end;
    return ident.substr(0, end);
}

} // namespace

bool ident_ends_with_keyword(std::string_view ident, std::string_view keyword) {
    const auto words = ident_words(strip_trailing_nonalpha(ident));
    if (words.empty()) return false;
    const std::string want = to_lower(keyword);
    std::string tail;
    for (std::size_t k = words.size(); k-- > 0;) {
        tail = to_lower(words[k]) + tail;
        if (tail == want) return true;
        if (tail.size() > want.size()) return false;
    }
    return false;
}

bool ident_contains_keyword(std::string_view ident, std::string_view keyword) {
    const auto words = ident_words(ident);
    const std::string want = to_lower(keyword);
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::string run;
        for (std::size_t j = i; j < words.size(); ++j) {
            run += to_lower(words[j]);
            if (run == want) return true;
            if (run.size() >= want.size()) break;
        }
    }
    return false;
}

namespace {

void append_utf8(std::string& out, unsigned long cp) {
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
}

} // namespace

std::size_t java_literal_byte_length(std::string_view body) {
    std::string decoded;
    decoded.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '\\' || i + 1 >= body.size()) {
            decoded.push_back(body[i]);
            continue;
        }
        const char esc = body[++i];
        switch (esc) {
        case 'n': decoded.push_back('\n'); break;
        case 't': decoded.push_back('\t'); break;
        case 'r': decoded.push_back('\r'); break;
        case 'b': decoded.push_back('\b'); break;
        case 'f': decoded.push_back('\f'); break;
        case '0': decoded.push_back('\0'); break;
        case 'u': {
            unsigned long cp = 0;
            std::size_t digits = 0;
            while (digits < 4 && i + 1 < body.size() &&
                   std::isxdigit(static_cast<unsigned char>(body[i + 1]))) {
                const char h = body[++i];
                cp = cp * 16 + static_cast<unsigned long>(
                                   std::isdigit(static_cast<unsigned char>(h))
                                       ? h - '0'
                                       : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
                ++digits;
            }
            append_utf8(decoded, cp);
            break;
        }
        default: decoded.push_back(esc); break;
        }
    }
    return decoded.size();
}

std::optional<std::vector<CallArg>> split_call_args(std::string_view text,
                                                    std::size_t open_paren) {
    if (open_paren >= text.size() || text[open_paren] != '(') return std::nullopt;
    std::vector<CallArg> args;
    int depth = 1;
    std::size_t arg_start = open_paren + 1;
    bool in_string = false, in_char = false;
    for (std::size_t i = open_paren + 1; i < text.size(); ++i) {
        const char c = text[i];
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
        switch (c) {
        case '"': in_string = true; break;
        case '\'': in_char = true; break;
        case '(': case '[': case '{': ++depth; break;
        case ')': case ']': case '}':
            --depth;
            if (depth == 0) {
                const auto piece = trim(text.substr(arg_start, i - arg_start));
                if (!piece.empty() || !args.empty())
                    args.push_back({std::string(piece),
                                    arg_start + (piece.data() - text.substr(arg_start).data())});
                return args;
            }
            break;
        case ',':
            if (depth == 1) {
                const auto piece = trim(text.substr(arg_start, i - arg_start));
                args.push_back({std::string(piece),
                                arg_start + (piece.data() - text.substr(arg_start).data())});
                arg_start = i + 1;
            }
            break;
        default: break;
        }
    }
    return std::nullopt; // never closed
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace jcascan::text
