#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"
#include "threatfix/repair.hpp"

namespace threatfix {

enum class SmtMode {
    Check,   // pinned valuation, one push/check-sat/pop per rule
    Repair,  // negated rules, weighted soft assertions, one check-sat
};

/// SMT-LIB2 script: enum datatypes for items, types, attributes and values,
/// the fixed relations as functions, the attribute validity constraints and
/// the translated rules. Byte-identical for equal inputs.
std::string emit_smtlib(const SystemModel& model, const RuleSet& rules, SmtMode mode);

/// Weighted CNF of the minimum repair of `rules` in the classic
/// `p wcnf vars clauses top` format, with top = 1 + the sum of soft weights.
/// Comment lines map attribute variables back to cells.
std::string emit_wcnf(const SystemModel& model, const RuleSet& rules);

struct WcnfSolution {
    std::int64_t cost = -1;   // from the `o` line, -1 when absent
    std::vector<bool> model;  // indexed by variable
    bool unsat = false;       // `s UNSATISFIABLE`
};

/// Reads MaxSAT evaluator output: `o <cost>`, `v <lits...>` and optional `s` lines.
WcnfSolution parse_wcnf_solution(std::string_view text);

/// Repair report for an external solver's answer to emit_wcnf(model, rules).
RepairReport import_wcnf_solution(const SystemModel& model, const RuleSet& rules, std::string_view text,
                                  const EngineConfig& config = {});

}  // namespace threatfix
