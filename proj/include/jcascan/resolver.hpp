#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "jcascan/engine.hpp"
#include "jcascan/types.hpp"

namespace jcascan::resolve {

enum class BindingKind {
    StringLit,
    IntLit,
    ByteArray,
    CharArray,
    NullLit,
    ExprUnknown,
};

const char* binding_kind_name(BindingKind k);

struct Binding {
    std::string identifier;
    BindingKind kind = BindingKind::ExprUnknown;
    std::string text_value;               // literal payload when known
    long long int_value = 0;              // valid when kind == IntLit
    std::optional<std::size_t> bit_length; // 8 x bytes for strings/arrays
};

// Flow-insensitive constant environment for one post section. Lookup of an
// unbound name yields ExprUnknown; later assignments shadow earlier ones.
// Carries two derived caches so confirmation stays linear in section size:
// the resolvable iteration counts of derivation calls, and the identifiers
// that feed derivation-like calls.
struct BindingEnv {
    std::unordered_map<std::string, Binding> bindings;
    Section section = Section::Standalone;
    std::vector<std::string> texts; // the section's snippet texts, in order
    std::vector<long long> derivation_iterations;
    std::unordered_set<std::string> idents_in_derivation_calls;

    Binding lookup(const std::string& identifier) const;
};

// Recognized declaration/assignment forms: string, char and int literals,
// null, new byte[N], new byte[]{..}, new char[]{..}, bare {..} array
// initializers, and "lit".toCharArray(). Everything else binds ExprUnknown.
BindingEnv collect_bindings(const std::vector<Snippet>& snippets);

struct ConfirmOptions {
    bool strict_context = false;
};

// Runs the value-confirmation step for one candidate finding. Never touches
// rule_id, span or severity; only status and evidence change. Calling it for
// an automatic rule (ConfirmKind::None) is a contract violation and throws.
engine::Finding confirm(const engine::Finding& f, rules::ConfirmKind kind,
                        const BindingEnv& env, const Snippet& sn,
                        const ConfirmOptions& opts = {});

// Helpers shared with the engine and tests.

// Bit length of a literal-ish expression: "lit" (optionally with
// .getBytes()/.toCharArray() tacked on), 'c', new byte[N], new byte[]{..},
// {..}, or an identifier bound to one of those.
std::optional<std::size_t> resolve_bit_length(std::string_view expr,
                                              const BindingEnv& env);

// Integer value of a literal or an int-bound identifier.
std::optional<long long> resolve_int(std::string_view expr, const BindingEnv& env);

// True when the expression is a non-null constant: a string/char literal, a
// literal with .toCharArray()/.getBytes(), or an identifier bound to one.
bool resolves_to_constant(std::string_view expr, const BindingEnv& env);

bool is_null_literal(std::string_view expr, const BindingEnv& env);

} // namespace jcascan::resolve
