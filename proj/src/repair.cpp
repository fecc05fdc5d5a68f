#include "threatfix/repair.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "threatfix/encoder.hpp"
#include "threatfix/error.hpp"
#include "threatfix/solver_stack.hpp"

namespace threatfix {

std::string_view to_string(RepairMode mode) {
    switch (mode) {
        case RepairMode::Exact: return "exact";
        case RepairMode::Partial: return "partial";
        case RepairMode::Heuristic: return "heuristic";
    }
    return "?";
}

std::optional<RepairMode> parse_mode(std::string_view text) {
    if (text == "exact") return RepairMode::Exact;
    if (text == "partial") return RepairMode::Partial;
    if (text == "heuristic") return RepairMode::Heuristic;
    return std::nullopt;
}

std::string_view to_string(SatResult status) {
    switch (status) {
        case SatResult::Sat: return "sat";
        case SatResult::Unsat: return "unsat";
        case SatResult::Unknown: return "unknown";
    }
    return "?";
}

namespace {

// Integer weights for the soft assertions from `base`: every cost times the
// least common denominator. Zero-cost moves carry no soft clause at all.
void add_soft_assertions(SolverStack& solver, const SystemModel& model, const VarTable& vt, const Valuation& base) {
    const auto softs = soft_assertions(model, &base);
    const std::int64_t scale = cost_scale(softs);
    for (const auto& s : softs) {
        if (s.cost != Cost(0)) solver.add_soft(soft_literal(vt, s), scaled_cost(s.cost, scale));
    }
}

std::vector<Change> diff(const SystemModel& model, const Valuation& from, const Valuation& to) {
    std::vector<Change> out;
    for (CellId c = 0; c < from.size(); ++c) {
        if (from[c] != to[c]) out.push_back({c, from[c], to[c], model.cost(c, from[c], to[c])});
    }
    return out;
}

RuleCheck check_one(const SystemModel& model, const Evaluator& ev, const Rule& rule, const Valuation& valuation,
                    const EngineConfig& config) {
    SolverStack solver(config.seed, config.conflict_budget);
    const VarTable vt = encode_model(model, solver);
    pin_valuation(model, vt, valuation, solver);
    assert_rule(model, vt, rule.formula, false, solver);
    RuleCheck out{rule.name, solver.solve(), {}};
    if (out.verdict == SatResult::Sat) out.witnesses = ev.witnesses(rule.name, rule.formula, config.witness_cap, &valuation);
    return out;
}

std::vector<RuleCheck> check_all(const SystemModel& model, const Evaluator& ev, const RuleSet& rules,
                                 const Valuation& valuation, const EngineConfig& config) {
    std::vector<RuleCheck> out(rules.size());
    const unsigned workers = std::max(1U, std::min<unsigned>(config.jobs, static_cast<unsigned>(rules.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < rules.size(); ++i) out[i] = check_one(model, ev, rules[i], valuation, config);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < rules.size(); i = next++) {
                    out[i] = check_one(model, ev, rules[i], valuation, config);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

struct Optimum {
    SatResult status = SatResult::Unknown;
    Valuation valuation;
    bool alternatives = false;
};

// max_solve(F_M and not T(phi) for phi in rules, with the soft assertions).
Optimum optimise(const SystemModel& model, const std::vector<const Rule*>& rules, const EngineConfig& config) {
    SolverStack solver(config.seed, config.conflict_budget);
    const VarTable vt = encode_model(model, solver);
    for (const Rule* r : rules) assert_rule(model, vt, r->formula, true, solver);
    add_soft_assertions(solver, model, vt, model.valuation());

    const MaxSatResult best = solver.max_solve();
    Optimum out;
    out.status = best.status;
    if (best.status != SatResult::Sat) return out;
    out.valuation = vt.decode(model, best.model);

    if (config.probe_alternatives && best.cost > 0) {
        solver.push();
        std::vector<Lit> block;
        for (CellId c = 0; c < out.valuation.size(); ++c) block.push_back(-vt.attr(c, out.valuation[c]));
        solver.add_clause(block);
        const MaxSatResult other = solver.max_solve();
        out.alternatives = other.status == SatResult::Sat && other.cost == best.cost;
        solver.pop();
    }
    return out;
}

void add_unrepairable(RepairReport& report, const Evaluator& ev, const Rule& rule, const Valuation& valuation,
                      const EngineConfig& config) {
    report.unrepairable.push_back({rule.name, ev.witnesses(rule.name, rule.formula, config.witness_cap, &valuation)});
}

// Shared tail of the exact and partial modes: `selected` are the rules the
// optimisation covers, the rest were already classified as unrepairable.
RepairReport optimise_report(const SystemModel& model, const RuleSet& rules, const std::vector<RuleCheck>& checks,
                             const std::vector<bool>& selected, RepairMode mode, const EngineConfig& config) {
    const Evaluator ev(model);
    RepairReport report;
    report.mode = mode;
    report.valuation = model.valuation();

    std::vector<const Rule*> group;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (selected[i]) group.push_back(&rules[i]);
    }
    const Optimum opt = optimise(model, group, config);
    report.status = opt.status;

    for (std::size_t i = 0; i < rules.size(); ++i) {
        const bool matched = checks[i].verdict == SatResult::Sat;
        if (!matched) {
            report.no_threat.push_back(rules[i].name);
        } else if (selected[i] && opt.status == SatResult::Sat) {
            report.repaired.push_back(rules[i].name);
        } else {
            add_unrepairable(report, ev, rules[i], model.valuation(), config);
        }
    }
    if (opt.status == SatResult::Sat) {
        report.valuation = opt.valuation;
        report.changes = diff(model, model.valuation(), opt.valuation);
        for (const auto& ch : report.changes) report.total_cost += ch.cost;
        report.alternatives = opt.alternatives;
    }
    return report;
}

// Reports Unknown when a detection check ran out of budget.
std::optional<RepairReport> unknown_checks(const SystemModel& model, const RuleSet& rules,
                                           const std::vector<RuleCheck>& checks, RepairMode mode) {
    bool unknown = false;
    for (const auto& c : checks) unknown = unknown || c.verdict == SatResult::Unknown;
    if (!unknown) return std::nullopt;
    RepairReport report;
    report.mode = mode;
    report.status = SatResult::Unknown;
    report.valuation = model.valuation();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (checks[i].verdict == SatResult::Unsat) {
            report.no_threat.push_back(rules[i].name);
        } else {
            report.unrepairable.push_back({rules[i].name, checks[i].witnesses});
        }
    }
    return report;
}

}  // namespace

std::vector<RuleCheck> check(const SystemModel& model, const RuleSet& rules, const EngineConfig& config) {
    const Evaluator ev(model);
    return check_all(model, ev, rules, model.valuation(), config);
}

RepairReport minimal_repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config) {
    const auto checks = check(model, rules, config);
    if (auto r = unknown_checks(model, rules, checks, RepairMode::Exact)) return *r;
    return optimise_report(model, rules, checks, std::vector<bool>(rules.size(), true), RepairMode::Exact, config);
}

RepairReport partial_repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config) {
    const auto checks = check(model, rules, config);
    if (auto r = unknown_checks(model, rules, checks, RepairMode::Partial)) return *r;
    std::vector<bool> selected(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        selected[i] = checks[i].verdict == SatResult::Unsat || has_attr(rules[i].formula);
    }
    return optimise_report(model, rules, checks, selected, RepairMode::Partial, config);
}

RepairReport heuristic_partial_repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config) {
    const Evaluator ev(model);
    RepairReport report;
    report.mode = RepairMode::Heuristic;
    report.status = SatResult::Sat;

    SolverStack solver(config.seed, config.conflict_budget);
    const VarTable vt = encode_model(model, solver);
    Valuation current = model.valuation();
    std::vector<Formula> settled;        // repaired and no-threat rules
    std::vector<const Rule*> failed;     // explained at the end
    auto give_up = [&](const Rule& r, SatResult why) {
        if (why == SatResult::Unknown) report.status = SatResult::Unknown;
        failed.push_back(&r);
    };

    for (const Rule& rule : rules) {
        solver.push();
        pin_valuation(model, vt, current, solver);
        assert_rule(model, vt, rule.formula, false, solver);
        const SatResult present = solver.solve();
        solver.pop();

        if (present == SatResult::Unsat) {
            report.no_threat.push_back(rule.name);
            settled.push_back(rule.formula);
            continue;
        }
        if (present == SatResult::Unknown || !has_attr(rule.formula)) {
            give_up(rule, present);
            continue;
        }

        solver.push();
        add_soft_assertions(solver, model, vt, current);
        assert_rule(model, vt, rule.formula, true, solver);
        const MaxSatResult best = solver.max_solve();
        solver.pop();
        if (best.status != SatResult::Sat) {
            give_up(rule, best.status);
            continue;
        }
        const Valuation candidate = vt.decode(model, best.model);

        // Accept only if no settled rule comes back under the candidate.
        solver.push();
        assert_any(model, vt, settled, solver);
        pin_valuation(model, vt, candidate, solver);
        const SatResult retriggered = solver.solve();
        solver.pop();
        if (retriggered != SatResult::Unsat) {
            give_up(rule, retriggered);
            continue;
        }
        for (const auto& ch : diff(model, current, candidate)) {
            report.changes.push_back(ch);
            report.total_cost += ch.cost;
        }
        current = candidate;
        report.repaired.push_back(rule.name);
        settled.push_back(rule.formula);
    }

    for (const Rule* r : failed) add_unrepairable(report, ev, *r, current, config);
    report.valuation = std::move(current);
    return report;
}

RepairReport repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config) {
    switch (config.mode) {
        case RepairMode::Exact: return minimal_repair(model, rules, config);
        case RepairMode::Partial: return partial_repair(model, rules, config);
        case RepairMode::Heuristic: return heuristic_partial_repair(model, rules, config);
    }
    return partial_repair(model, rules, config);
}

SystemModel apply_repair(const SystemModel& model, const RepairReport& report) {
    Valuation v = model.valuation();
    for (const auto& ch : report.changes) {
        if (ch.cell >= v.size()) throw UsageError("change refers to unknown cell " + std::to_string(ch.cell));
        if (ch.to >= model.domain(ch.cell).size()) {
            throw UsageError("change moves cell " + std::to_string(ch.cell) + " outside its domain");
        }
        v[ch.cell] = ch.to;
    }
    return model.with_valuation(std::move(v));
}

}  // namespace threatfix
