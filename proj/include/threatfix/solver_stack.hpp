#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "threatfix/cnf.hpp"
#include "threatfix/sat_solver.hpp"

namespace threatfix {

struct MaxSatResult {
    SatResult status = SatResult::Unknown;
    std::int64_t cost = 0;  // minimum violated weight when Sat
    std::vector<bool> model;
};

/// Incremental solver with a context stack and weighted soft clause groups.
///
/// Clauses added inside a context carry the negated selector literal of that
/// context and are only active while it is assumed; pop retires the selector
/// for good. Soft groups registered inside a context are dropped on pop.
class SolverStack : public ClauseSink {
public:
    explicit SolverStack(std::uint64_t seed = 0, std::int64_t conflict_budget = -1);

    void push();
    void pop();
    std::size_t depth() const noexcept { return contexts_.size(); }

    int new_var() override { return sat_.new_var(); }
    int num_vars() const override { return sat_.num_vars(); }
    void add_clause(std::span<const Lit> clause) override;
    using ClauseSink::add_clause;

    /// Registers a soft group: violating any of its clauses costs `cost` once.
    void add_soft(std::vector<std::vector<Lit>> clauses, std::int64_t cost);
    void add_soft(Lit unit, std::int64_t cost) { add_soft({{unit}}, cost); }
    std::size_t num_soft() const noexcept { return softs_.size(); }

    /// Satisfiability of the hard clauses; soft groups are ignored.
    SatResult solve();

    /// Minimum total weight of violated soft groups subject to the hard clauses.
    MaxSatResult max_solve();

    /// Model from the last Sat answer, indexed by variable.
    const std::vector<bool>& model() const noexcept { return model_; }

    void set_conflict_budget(std::int64_t budget) noexcept { budget_ = budget; }
    std::int64_t conflict_budget() const noexcept { return budget_; }

private:
    struct Soft {
        std::vector<std::vector<Lit>> clauses;
        std::int64_t cost;
        Lit violated;  // true whenever the group may be violated
    };
    struct Context {
        Lit selector;
        std::size_t softs;
    };

    SatResult run();
    std::int64_t violated_cost(const std::vector<bool>& model) const;

    SatSolver sat_;
    std::int64_t budget_;
    std::vector<Context> contexts_;
    std::vector<Soft> softs_;
    std::vector<bool> model_;
};

}  // namespace threatfix
