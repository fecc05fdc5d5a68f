#pragma once

#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <span>
#include <vector>

namespace threatfix {

/// DIMACS-style literal: +v or -v for variable v >= 1.
using Lit = std::int32_t;

inline int var_of(Lit l) { return std::abs(l); }

/// Destination for generated clauses; variables are numbered from 1.
class ClauseSink {
public:
    virtual ~ClauseSink() = default;
    virtual int new_var() = 0;
    virtual int num_vars() const = 0;
    virtual void add_clause(std::span<const Lit> clause) = 0;

    void add_clause(std::initializer_list<Lit> clause) {
        add_clause(std::span<const Lit>(clause.begin(), clause.size()));
    }
};

/// Plain clause list.
class Cnf : public ClauseSink {
public:
    int new_var() override { return ++vars_; }
    int num_vars() const override { return vars_; }
    void add_clause(std::span<const Lit> clause) override { clauses_.emplace_back(clause.begin(), clause.end()); }
    using ClauseSink::add_clause;

    const std::vector<std::vector<Lit>>& clauses() const noexcept { return clauses_; }

private:
    int vars_ = 0;
    std::vector<std::vector<Lit>> clauses_;
};

/// Truth of `clause` under a model indexed by variable (index 0 unused).
inline bool clause_satisfied(std::span<const Lit> clause, const std::vector<bool>& model) {
    for (Lit l : clause) {
        const auto v = static_cast<std::size_t>(var_of(l));
        if (v < model.size() && model[v] == (l > 0)) return true;
    }
    return false;
}

/// Adds one at-least-one clause and the pairwise at-most-one clauses.
inline void exactly_one(ClauseSink& sink, std::span<const Lit> lits) {
    sink.add_clause(lits);
    for (std::size_t i = 0; i < lits.size(); ++i) {
        for (std::size_t j = i + 1; j < lits.size(); ++j) sink.add_clause({-lits[i], -lits[j]});
    }
}

}  // namespace threatfix
