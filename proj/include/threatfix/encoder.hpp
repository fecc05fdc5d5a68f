#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "threatfix/circuit.hpp"
#include "threatfix/cnf.hpp"
#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"
#include "threatfix/semantics.hpp"
#include "threatfix/translate.hpp"

namespace threatfix {

/// Propositional variables for attribute cells: attr(c, x) is true iff cell
/// c holds value x.
class VarTable {
public:
    Lit attr(CellId cell, ValueId value) const { return first_[cell] + static_cast<Lit>(value); }
    std::size_t num_cells() const noexcept { return first_.size(); }
    /// Variables 1 .. num_attr_vars() are the attribute variables.
    int num_attr_vars() const noexcept { return count_; }

    /// Reads the valuation back out of a solver model (indexed by variable).
    Valuation decode(const SystemModel& model, const std::vector<bool>& assignment) const;

private:
    friend VarTable encode_model(const SystemModel&, ClauseSink&);
    std::vector<Lit> first_;
    int count_ = 0;
};

/// Allocates attribute variables (cell-major, domain order) and adds F_M:
/// exactly one value per applicable cell. Must run on a fresh sink so the
/// attribute variables come first.
VarTable encode_model(const SystemModel& model, ClauseSink& sink);

/// F-hat_M: fixes every cell to `valuation` with units not attr(c, x).
void pin_valuation(const SystemModel& model, const VarTable& vt, const Valuation& valuation, ClauseSink& sink);

/// The option of moving `cell` to `value`; violated exactly when adopted.
struct SoftAssertion {
    CellId cell;
    ValueId value;
    Cost cost;

    friend bool operator==(const SoftAssertion&, const SoftAssertion&) = default;
};

/// One assertion per cell and value other than `base` (the ingested
/// valuation by default), priced from the base value.
std::vector<SoftAssertion> soft_assertions(const SystemModel& model, const Valuation* base = nullptr);

/// The unit clause literal of a soft assertion: not attr(cell, value).
inline Lit soft_literal(const VarTable& vt, const SoftAssertion& s) { return -vt.attr(s.cell, s.value); }

/// Least common denominator of the assertion costs; multiplying by it turns
/// every cost into an integer. Throws LimitError on 64-bit overflow.
std::int64_t cost_scale(const std::vector<SoftAssertion>& softs);
/// `cost` times `scale`, which must be a multiple of its denominator.
std::int64_t scaled_cost(const Cost& cost, std::int64_t scale);

/// SAT variables standing for one positively grounded path quantifier.
struct PathInstance {
    std::string var;
    std::vector<Lit> length;              // length[k - 1]  <=>  k_p = k
    std::vector<std::vector<Lit>> slots;  // slots[i - 1][j] <=> x_p^i = j-th connector
};

/// Decoded path of an instance under a solver model.
Path decode_path(const SystemModel& model, const PathInstance& inst, const std::vector<bool>& assignment);

/// Grounds path-free formulas into a circuit over attribute and path-slot
/// variables. Item quantifiers are expanded; fixed predicates become
/// constants. Length and slot quantifiers in positive polarity become fresh
/// SAT variables with exactly-one constraints, in negative polarity they are
/// expanded over their domains.
class Grounder {
public:
    Grounder(const SystemModel& model, const VarTable& vt, ClauseSink& sink);

    /// `positive` says whether the result is asserted as is (true) or
    /// under a negation (false); it selects the quantifier treatment.
    Circuit::Ref ground(const PathFree& f, bool positive = true);
    void assert_true(Circuit::Ref r) { circuit_.assert_true(r, *sink_); }

    Circuit& circuit() noexcept { return circuit_; }
    const std::vector<PathInstance>& instances() const noexcept { return instances_; }

private:
    struct PathBinding {
        bool symbolic = false;
        std::size_t instance = 0;     // symbolic
        std::uint32_t length = 0;     // concrete
        std::vector<ItemId> slots;    // concrete, 0-based slot index, kNone when unbound
    };
    using Dist = std::vector<std::pair<ItemId, Circuit::Ref>>;

    Circuit::Ref ground_exists_length(const PathFree& f, bool positive);
    Circuit::Ref ground_exists_slot(const PathFree& f, bool positive);
    Dist dist(const Term& t);
    Circuit::Ref equal(const Term& a, const Term& b);
    std::optional<bool> static_value(const PathFree& f) const;
    bool depends_on(const PathFree& f, const std::string& path, std::uint32_t slot) const;

    const SystemModel* model_;
    const VarTable* vt_;
    ClauseSink* sink_;
    Circuit circuit_;
    Assignment items_;
    std::map<std::string, std::vector<PathBinding>> paths_;  // stack per name
    std::vector<PathInstance> instances_;
};

/// Asserts T(f), or its negation, into `sink` for one rule.
std::vector<PathInstance> assert_rule(const SystemModel& model, const VarTable& vt, const Formula& f, bool negated,
                                      ClauseSink& sink);

/// Asserts the disjunction of T(f) over `rules`; false when empty.
void assert_any(const SystemModel& model, const VarTable& vt, const std::vector<Formula>& rules, ClauseSink& sink);

}  // namespace threatfix
