#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "threatfix/cnf.hpp"

namespace threatfix {

enum class SatResult { Sat, Unsat, Unknown };

/// Conflict-driven clause-learning SAT solver: two watched literals, first-UIP
/// learning, VSIDS branching with phase saving (initial phase false), Luby
/// restarts and activity-based learnt clause deletion. Runs are deterministic
/// for a given seed and clause insertion order.
class SatSolver : public ClauseSink {
public:
    explicit SatSolver(std::uint64_t seed = 0);

    int new_var() override;
    int num_vars() const override { return static_cast<int>(assigns_.size()); }
    void add_clause(std::span<const Lit> clause) override;
    using ClauseSink::add_clause;

    /// Solves under `assumptions`. A negative budget means unlimited
    /// conflicts; exhausting the budget yields Unknown.
    SatResult solve(std::span<const Lit> assumptions = {}, std::int64_t conflict_budget = -1);

    /// Assignment from the last Sat answer, indexed by variable (index 0 unused).
    const std::vector<bool>& model() const noexcept { return model_; }

    /// False once the clause set is unsatisfiable without assumptions.
    bool okay() const noexcept { return ok_; }

    /// Deletes clauses satisfied by the top-level assignment.
    void remove_satisfied();

    std::uint64_t conflicts() const noexcept { return conflicts_; }
    std::uint64_t decisions() const noexcept { return decisions_; }

private:
    using ILit = std::uint32_t;  // 2 * var + sign, var 0-based
    static constexpr ILit kUndefLit = 0xFFFFFFFFU;
    static constexpr std::int8_t kTrue = 0;
    static constexpr std::int8_t kFalse = 1;
    static constexpr std::int8_t kUndef = 2;
    static constexpr int kNoReason = -1;

    struct Clause {
        std::vector<ILit> lits;
        bool learnt = false;
        bool deleted = false;
        double activity = 0;
    };
    struct Watcher {
        int cref;
        ILit blocker;
    };

    static ILit to_ilit(Lit l) { return static_cast<ILit>((std::abs(l) - 1) * 2 + (l < 0 ? 1 : 0)); }
    static std::uint32_t var(ILit l) { return l >> 1; }
    static bool sign(ILit l) { return l & 1U; }
    static ILit neg(ILit l) { return l ^ 1U; }

    std::int8_t value(ILit l) const {
        const std::int8_t a = assigns_[var(l)];
        return a == kUndef ? kUndef : static_cast<std::int8_t>(a ^ static_cast<std::int8_t>(sign(l)));
    }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    void enqueue(ILit l, int reason);
    int propagate();
    void analyze(int confl, std::vector<ILit>& out, int& bt_level);
    void cancel_until(int level);
    ILit pick_branch();
    SatResult search(std::int64_t nof_conflicts, std::int64_t budget_end, std::span<const ILit> assumptions);
    void attach(int cref);
    void reduce_db();
    void rebuild_watches();
    bool locked(int cref) const;

    void var_bump(std::uint32_t v);
    void clause_bump(Clause& c);

    // VSIDS order heap
    bool heap_less(std::uint32_t a, std::uint32_t b) const { return activity_[a] > activity_[b]; }
    void heap_insert(std::uint32_t v);
    void heap_up(std::size_t i);
    void heap_down(std::size_t i);
    std::uint32_t heap_pop();

    bool ok_ = true;
    std::vector<Clause> clauses_;
    std::vector<int> learnts_;
    std::vector<std::vector<Watcher>> watches_;
    std::vector<std::int8_t> assigns_;
    std::vector<bool> phase_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<ILit> trail_;
    std::vector<int> trail_lim_;
    std::size_t qhead_ = 0;

    std::vector<double> activity_;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    std::vector<std::uint32_t> heap_;
    std::vector<int> heap_pos_;

    std::vector<std::uint8_t> seen_;
    double max_learnts_ = 0;

    std::vector<bool> model_;
    std::mt19937_64 rng_;
    std::uint64_t conflicts_ = 0;
    std::uint64_t decisions_ = 0;
};

}  // namespace threatfix
