#include "threatfix/solver_stack.hpp"

#include <algorithm>
#include <numeric>

#include "threatfix/error.hpp"

namespace threatfix {

SolverStack::SolverStack(std::uint64_t seed, std::int64_t conflict_budget) : sat_(seed), budget_(conflict_budget) {}

void SolverStack::push() { contexts_.push_back({sat_.new_var(), softs_.size()}); }

void SolverStack::pop() {
    if (contexts_.empty()) throw UsageError("pop on an empty solver stack");
    const Context ctx = contexts_.back();
    contexts_.pop_back();
    softs_.resize(ctx.softs);
    sat_.add_clause({-ctx.selector});
    sat_.remove_satisfied();
}

void SolverStack::add_clause(std::span<const Lit> clause) {
    if (contexts_.empty()) {
        sat_.add_clause(clause);
        return;
    }
    std::vector<Lit> guarded(clause.begin(), clause.end());
    guarded.push_back(-contexts_.back().selector);
    sat_.add_clause(guarded);
}

void SolverStack::add_soft(std::vector<std::vector<Lit>> clauses, std::int64_t cost) {
    if (cost <= 0) throw UsageError("soft group cost must be positive, got " + std::to_string(cost));
    Soft s{std::move(clauses), cost, 0};
    if (s.clauses.size() == 1 && s.clauses.front().size() == 1) {
        s.violated = -s.clauses.front().front();
        while (var_of(s.violated) > sat_.num_vars()) sat_.new_var();
    } else {
        const Lit relax = sat_.new_var();
        for (const auto& c : s.clauses) {
            std::vector<Lit> relaxed = c;
            relaxed.push_back(relax);
            add_clause(relaxed);
        }
        s.violated = relax;
    }
    softs_.push_back(std::move(s));
}

SatResult SolverStack::run() {
    std::vector<Lit> assumptions;
    assumptions.reserve(contexts_.size());
    for (const auto& ctx : contexts_) assumptions.push_back(ctx.selector);
    const SatResult r = sat_.solve(assumptions, budget_);
    model_ = r == SatResult::Sat ? sat_.model() : std::vector<bool>{};
    return r;
}

SatResult SolverStack::solve() { return run(); }

std::int64_t SolverStack::violated_cost(const std::vector<bool>& model) const {
    std::int64_t total = 0;
    for (const auto& s : softs_) {
        const bool broken = std::any_of(s.clauses.begin(), s.clauses.end(),
                                        [&](const std::vector<Lit>& c) { return !clause_satisfied(c, model); });
        if (broken) total += s.cost;
    }
    return total;
}

MaxSatResult SolverStack::max_solve() {
    MaxSatResult out;
    out.status = run();
    if (out.status != SatResult::Sat) return out;
    out.model = model_;
    out.cost = violated_cost(out.model);
    if (out.cost == 0 || softs_.empty()) return out;

    // Linear SAT-UNSAT search over a sequential weighted counter.
    // s[i][j] (j = 1..K) holds when the weight of violated groups among the
    // first i + 1 reaches at least j; K is the first upper bound, so larger
    // sums saturate at K.
    std::int64_t g = 0;
    for (const auto& s : softs_) g = std::gcd(g, s.cost);
    const std::int64_t bound = out.cost / g;
    const auto K = static_cast<std::size_t>(bound);

    push();
    std::vector<std::vector<Lit>> s(softs_.size(), std::vector<Lit>(K + 1, 0));
    for (std::size_t i = 0; i < softs_.size(); ++i) {
        for (std::size_t j = 1; j <= K; ++j) s[i][j] = new_var();
        const Lit v = softs_[i].violated;
        const auto w = static_cast<std::size_t>(softs_[i].cost / g);
        for (std::size_t j = 1; j <= std::min(w, K); ++j) add_clause({-v, s[i][j]});
        if (i == 0) continue;
        for (std::size_t j = 1; j <= K; ++j) {
            add_clause({-s[i - 1][j], s[i][j]});
            add_clause({-v, -s[i - 1][j], s[i][std::min(j + w, K)]});
        }
    }
    const std::vector<Lit>& total = s.back();

    std::int64_t best = bound;
    for (;;) {
        // Require the normalised violated weight to drop below `best`.
        add_clause({-total[static_cast<std::size_t>(best)]});
        const SatResult r = run();
        if (r == SatResult::Unknown) {
            out.status = SatResult::Unknown;
            break;
        }
        if (r == SatResult::Unsat) break;
        out.model = model_;
        out.cost = violated_cost(out.model);
        best = out.cost / g;
        if (best == 0) break;
    }
    pop();
    model_ = out.model;
    return out;
}

}  // namespace threatfix
