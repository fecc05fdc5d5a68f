#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "threatfix/cnf.hpp"

namespace threatfix {

/// Hash-consed and-inverter graph with constant folding, lowered to CNF by
/// the Tseitin transformation. One instance feeds a single clause sink.
class Circuit {
public:
    /// 2 * node + negated. Node 0 is the constant true.
    using Ref = std::uint32_t;
    static constexpr Ref kTrue = 0;
    static constexpr Ref kFalse = 1;

    Circuit();

    Ref input(Lit lit);
    static Ref negate(Ref r) { return r ^ 1U; }
    Ref mk_and(std::vector<Ref> kids);
    Ref mk_or(std::vector<Ref> kids);
    Ref mk_and(Ref a, Ref b) { return mk_and(std::vector<Ref>{a, b}); }
    Ref mk_or(Ref a, Ref b) { return mk_or(std::vector<Ref>{a, b}); }

    static bool is_const(Ref r) { return r <= kFalse; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Literal equivalent to `r`, defining gates on first use. Constants are
    /// materialised through a forced variable.
    Lit literal(Ref r, ClauseSink& sink);

    /// Asserts `r`. A top-level conjunction is split into its conjuncts and a
    /// top-level disjunction becomes one clause.
    void assert_true(Ref r, ClauseSink& sink);

private:
    struct Node {
        bool is_input;
        Lit lit;                // inputs
        std::vector<Ref> kids;  // and-gates, sorted
    };

    std::vector<Node> nodes_;
    std::map<Lit, Ref> inputs_;
    std::map<std::vector<Ref>, Ref> ands_;
    std::vector<Lit> gate_lit_;  // 0 until encoded
    Lit true_lit_ = 0;
};

}  // namespace threatfix
