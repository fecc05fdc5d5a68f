#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"
#include "threatfix/sat_solver.hpp"
#include "threatfix/semantics.hpp"

namespace threatfix {

enum class RepairMode { Exact, Partial, Heuristic };

std::string_view to_string(RepairMode mode);
std::optional<RepairMode> parse_mode(std::string_view text);
std::string_view to_string(SatResult status);

inline constexpr std::int64_t kDefaultConflictBudget = 5'000'000;

struct EngineConfig {
    RepairMode mode = RepairMode::Partial;
    /// Conflicts allowed per solver call; negative means unlimited.
    std::int64_t conflict_budget = kDefaultConflictBudget;
    /// Upper bound on the valuation space the brute-force oracle may search.
    std::uint64_t oracle_bound = 1'000'000;
    /// Witnesses reported per unrepairable rule.
    std::size_t witness_cap = 100;
    std::uint64_t seed = 0;
    /// Worker threads for per-rule detection checks.
    unsigned jobs = 1;
    /// After an optimal repair, ask the solver whether a different valuation
    /// reaches the same cost.
    bool probe_alternatives = true;
};

struct RuleCheck {
    std::string name;
    SatResult verdict = SatResult::Unknown;  // Sat: the threat is present
    std::vector<Witness> witnesses;
};

/// Detection over F-hat_M and T(rule), one solver per rule.
std::vector<RuleCheck> check(const SystemModel& model, const RuleSet& rules, const EngineConfig& config = {});

/// One attribute change. Heuristic repairs may list the same cell more than
/// once, in the order the changes were committed.
struct Change {
    CellId cell;
    ValueId from;
    ValueId to;
    Cost cost;

    friend bool operator==(const Change&, const Change&) = default;
};

struct UnrepairableRule {
    std::string name;
    std::vector<Witness> witnesses;
};

struct RepairReport {
    SatResult status = SatResult::Unknown;
    RepairMode mode = RepairMode::Partial;
    Cost total_cost = 0;
    std::vector<Change> changes;
    std::vector<std::string> no_threat;
    std::vector<std::string> repaired;
    std::vector<UnrepairableRule> unrepairable;
    /// Another valuation with the same optimal cost exists.
    bool alternatives = false;
    /// Valuation after the repair.
    Valuation valuation;
};

/// Minimum repair of every rule at once.
RepairReport minimal_repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config = {});

/// Minimum repair restricted to the rules that are unmatched or mention
/// attributes; matched attribute-free rules are explained instead.
RepairReport partial_repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config = {});

/// Greedy rule-by-rule repair that only commits a step when no settled rule
/// is re-triggered.
RepairReport heuristic_partial_repair(const SystemModel& model, const RuleSet& rules,
                                      const EngineConfig& config = {});

/// Dispatches on config.mode.
RepairReport repair(const SystemModel& model, const RuleSet& rules, const EngineConfig& config = {});

/// M[v'\v] for the report's changes, applied in order.
SystemModel apply_repair(const SystemModel& model, const RepairReport& report);

}  // namespace threatfix
