#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "threatfix/formula.hpp"

namespace threatfix {

/// An element- or connector-valued term: a variable, or the source or
/// target of one. The variable is either an item variable or a connector
/// slot x_p^i of a translated path variable p.
struct Term {
    enum class Fn : std::uint8_t { Id, Src, Tgt };

    Fn fn = Fn::Id;
    std::string var;         // item variable, or the path variable owning the slot
    std::uint32_t slot = 0;  // 1-based slot index; 0 for item variables

    bool is_slot() const noexcept { return slot != 0; }
    friend bool operator==(const Term&, const Term&) = default;
};

struct PathFreeNode;
/// Path-free formula produced by the translation operator. Path variables are
/// replaced by a length selector k_p and connector slots x_p^1 .. x_p^{n-1}.
using PathFree = std::shared_ptr<const PathFreeNode>;

struct PathFreeNode {
    enum class Kind : std::uint8_t {
        Const,         // value
        Pred,          // predicate over item variables only
        Eq,            // lhs = rhs
        LengthIs,      // k_path = index
        LengthAtLeast, // index <= k_path
        Not,           // kids[0]
        And,           // kids
        Or,            // kids
        ExistsItem,    // exists var . kids[0]
        ExistsLength,  // exists k_path in 1..index . kids[0]
        ExistsSlot,    // exists x_path^index in C . kids[0]
    };

    Kind kind = Kind::Const;
    bool value = false;
    Predicate pred;
    Term lhs;
    Term rhs;
    Var var;
    std::string path;
    std::uint32_t index = 0;
    std::vector<PathFree> kids;
};

namespace pf {
PathFree constant(bool value);
PathFree pred(Predicate p);
PathFree eq(Term lhs, Term rhs);
PathFree length_is(std::string path, std::uint32_t k);
PathFree length_at_least(std::string path, std::uint32_t k);
PathFree negation(PathFree body);
PathFree conj(std::vector<PathFree> kids);
PathFree disj(std::vector<PathFree> kids);
PathFree exists_item(Var var, PathFree body);
PathFree exists_length(std::string path, std::uint32_t max_len, PathFree body);
PathFree exists_slot(std::string path, std::uint32_t index, PathFree body);
}  // namespace pf

/// The path block for variable p over n elements:
///   exists k_p . exists x^1 . (G_1 and exists x^2 . (G_2 and ... (G_{n-1} and body)))
/// with G_i = not(i <= k_p) or (acyclic_i and connected_i). False when n <= 1.
PathFree path_block(const std::string& path, std::size_t n, PathFree body);

/// Eliminates path quantifiers. `n` is the number of elements in the model.
PathFree translate(const Formula& f, std::size_t n);

std::string to_string(const PathFree& f);

}  // namespace threatfix
