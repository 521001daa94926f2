#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jcascan::text {

std::string to_lower(std::string_view s);

// Case-insensitive substring test (ASCII).
bool icontains(std::string_view haystack, std::string_view needle);

bool is_ident_char(char c);
bool is_ident_start(char c);

// Splits an identifier into its alphabetic word parts: "encKey" -> {enc, Key},
// "SALT2" -> {SALT}, "HTTPKey" -> {HTTP, Key}. Digits, '_' and '$' separate
// words; an upper-case run followed by a capitalized word is split before the
// final capital.
std::vector<std::string> ident_words(std::string_view ident);

// True when the identifier's trailing words spell the keyword, e.g.
// "encKey"/"SALT2" end with "key"/"salt" and "myInitVector" ends with
// "initvector". Trailing digits after the keyword are allowed; trailing words
// are not ("secretID" does not end with "secret").
bool ident_ends_with_keyword(std::string_view ident, std::string_view keyword);

// True when the keyword appears as a whole word (or run of words) anywhere in
// the identifier: "keyString" contains "key", "monkey" does not.
bool ident_contains_keyword(std::string_view ident, std::string_view keyword);

// UTF-8 byte length of a Java string literal body after resolving escape
// sequences (\n, \t, \\, \", \', \uXXXX, octal).
std::size_t java_literal_byte_length(std::string_view body);

// One argument of a call expression, with its offset in the enclosing text.
struct CallArg {
    std::string text; // trimmed
    std::size_t pos = 0;
};

// Splits the argument list that starts at the '(' found at open_paren.
// Respects nested parens/brackets/braces and string/char literals. Returns
// nullopt when open_paren does not point at '(' or the list never closes.
std::optional<std::vector<CallArg>> split_call_args(std::string_view text,
                                                    std::size_t open_paren);

std::string_view trim(std::string_view s);

} // namespace jcascan::text
