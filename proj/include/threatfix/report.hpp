#pragma once

#include <string>
#include <vector>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"
#include "threatfix/repair.hpp"

namespace threatfix {

/// Canonical JSON for a repair report:
///   {"status", "mode", "totalCost", "changes": [{"item", "attribute", "from", "to", "cost"}],
///    "rules": {"noThreat", "repaired", "unrepairable": [{"name", "witnesses": [{var: id}]}]},
///    "alternativeOptima"}
/// Costs are JSON integers when integral and "p/q" strings otherwise.
std::string repair_json(const SystemModel& model, const RepairReport& report);
std::string repair_text(const SystemModel& model, const RepairReport& report);

/// {"status": "threats"|"clean"|"unknown",
///  "rules": [{"name", "verdict", "witnesses"}], "threats": [names]}
std::string check_json(const SystemModel& model, const std::vector<RuleCheck>& checks);
std::string check_text(const SystemModel& model, const std::vector<RuleCheck>& checks);

/// Per rule: verdict, whether an attribute change can possibly repair it,
/// its witnesses and the path-free translation the encoder grounds.
std::string explain_json(const SystemModel& model, const RuleSet& rules, const std::vector<RuleCheck>& checks);
std::string explain_text(const SystemModel& model, const RuleSet& rules, const std::vector<RuleCheck>& checks);

}  // namespace threatfix
