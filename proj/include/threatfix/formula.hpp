#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "threatfix/model.hpp"

namespace threatfix {

enum class Sort : std::uint8_t { Element, Connector, Asset, Boundary, Path };

std::string_view to_string(Sort sort);
/// Sort of the items a quantifier of this kind ranges over (Path has none).
std::optional<ItemKind> item_kind(Sort sort);
Sort sort_of(ItemKind kind);

struct Var {
    std::string name;
    Sort sort = Sort::Element;

    friend bool operator==(const Var&, const Var&) = default;
};

/// The eleven threat-logic predicate forms. Src/Tgt cover both the connector
/// and the path variants; the subject's sort tells them apart.
enum class PredicateKind : std::uint8_t {
    Type,       // type(x) = "T"
    Val,        // val(x, "att") = "y"
    Src,        // src(c|p) = e
    Tgt,        // tgt(c|p) = e
    In,         // x in p
    Connector,  // connector(e, c)
    Crosses,    // crosses(c, b)
    Contained,  // contained(x, b)
    Holds,      // holds(x, a)
};

struct Predicate {
    PredicateKind kind = PredicateKind::Type;
    Var subject;
    Var object;             // unused by Type and Val
    std::string attribute;  // Val only
    std::string literal;    // Type / Val only

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Immutable threat-logic formula over the core connectives {not, or, exists}.
/// Cheap to copy; subtrees are shared.
class Formula {
public:
    enum class Kind : std::uint8_t { Predicate, Not, Or, Exists };

    static Formula predicate(Predicate p);
    static Formula negation(Formula body);
    static Formula disjunction(Formula lhs, Formula rhs);
    static Formula exists(Var var, Formula body);

    // Sugar, desugared on construction.
    static Formula conjunction(Formula lhs, Formula rhs);
    static Formula implication(Formula lhs, Formula rhs);
    static Formula forall(Var var, Formula body);

    Kind kind() const;
    const Predicate& pred() const;
    const Formula& body() const;  // Not, Exists
    const Formula& lhs() const;   // Or
    const Formula& rhs() const;   // Or
    const Var& bound() const;     // Exists

    friend bool operator==(const Formula& a, const Formula& b);

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Free variables, by name.
std::set<std::string> free_vars(const Formula& f);
bool is_closed(const Formula& f);

/// True iff some predicate node is a val(.,.) = . comparison.
bool has_attr(const Formula& f);
bool has_path_quantifier(const Formula& f);
/// Nesting depth of quantifiers.
std::size_t quantifier_depth(const Formula& f);

/// Checks every predicate argument's sort; throws SortError naming the variable.
void check_sorts(const Formula& f);

/// Canonical core-syntax text; parse_rule(print_rule(f)) == f.
std::string print_rule(const Formula& f);

struct Rule {
    std::string name;
    Formula formula;
};

using RuleSet = std::vector<Rule>;

/// Parses one formula. Throws ParseError (with line/column), SortError for
/// ill-sorted predicate arguments, and SortError for unbound variables.
Formula parse_rule(std::string_view text);

/// Parses a rule file: `rule NAME : formula` stanzas, `#` line comments.
/// Names must be unique and formulas closed.
RuleSet parse_rules(std::string_view text);

}  // namespace threatfix
