#include "threatfix/report.hpp"

#include <sstream>

#include <json.hpp>

#include "threatfix/translate.hpp"

namespace threatfix {

namespace {

using Json = nlohmann::ordered_json;

Json cost_json(const Cost& c) {
    if (c.denominator() == 1) return c.numerator();
    return to_string(c);
}

Json witness_json(const SystemModel& model, const Witness& w) {
    Json out = Json::object();
    for (const auto& [var, value] : w.bindings.entries()) out[var.name] = render_value(model, value);
    return out;
}

Json witnesses_json(const SystemModel& model, const std::vector<Witness>& ws) {
    Json out = Json::array();
    for (const auto& w : ws) out.push_back(witness_json(model, w));
    return out;
}

std::string witness_text(const SystemModel& model, const Witness& w) {
    std::string out;
    for (const auto& [var, value] : w.bindings.entries()) {
        if (!out.empty()) out += ' ';
        out += var.name + "=" + render_value(model, value);
    }
    return out.empty() ? "(no bindings)" : out;
}

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out.empty() ? "-" : out;
}

std::string_view check_status(const std::vector<RuleCheck>& checks) {
    bool unknown = false;
    for (const auto& c : checks) {
        if (c.verdict == SatResult::Sat) return "threats";
        unknown = unknown || c.verdict == SatResult::Unknown;
    }
    return unknown ? "unknown" : "clean";
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string repair_json(const SystemModel& model, const RepairReport& report) {
    Json j;
    j["status"] = to_string(report.status);
    j["mode"] = to_string(report.mode);
    j["totalCost"] = cost_json(report.total_cost);
    j["changes"] = Json::array();
    for (const auto& ch : report.changes) {
        const Cell& cell = model.cells()[ch.cell];
        j["changes"].push_back({{"item", model.id(cell.item)},
                                {"attribute", model.meta().attribute(cell.attr).name},
                                {"from", model.value_name(ch.cell, ch.from)},
                                {"to", model.value_name(ch.cell, ch.to)},
                                {"cost", cost_json(ch.cost)}});
    }
    Json rules;
    rules["noThreat"] = report.no_threat;
    rules["repaired"] = report.repaired;
    rules["unrepairable"] = Json::array();
    for (const auto& u : report.unrepairable) {
        rules["unrepairable"].push_back({{"name", u.name}, {"witnesses", witnesses_json(model, u.witnesses)}});
    }
    j["rules"] = std::move(rules);
    j["alternativeOptima"] = report.alternatives;
    return dump(j);
}

std::string repair_text(const SystemModel& model, const RepairReport& report) {
    std::ostringstream out;
    out << "status: " << to_string(report.status) << " (" << to_string(report.mode) << ")\n";
    out << "total cost: " << to_string(report.total_cost) << "\n";
    if (report.changes.empty()) {
        out << "changes: none\n";
    } else {
        out << "changes:\n";
        for (const auto& ch : report.changes) {
            const Cell& cell = model.cells()[ch.cell];
            out << "  " << model.id(cell.item) << " / " << model.meta().attribute(cell.attr).name << ": "
                << model.value_name(ch.cell, ch.from) << " -> " << model.value_name(ch.cell, ch.to) << " (cost "
                << to_string(ch.cost) << ")\n";
        }
    }
    out << "no threat: " << join(report.no_threat) << "\n";
    out << "repaired: " << join(report.repaired) << "\n";
    if (report.unrepairable.empty()) {
        out << "unrepairable: -\n";
    } else {
        out << "unrepairable:\n";
        for (const auto& u : report.unrepairable) {
            out << "  " << u.name << "\n";
            for (const auto& w : u.witnesses) out << "    " << witness_text(model, w) << "\n";
        }
    }
    if (report.alternatives) out << "other valuations reach the same cost\n";
    return out.str();
}

std::string check_json(const SystemModel& model, const std::vector<RuleCheck>& checks) {
    Json j;
    j["status"] = check_status(checks);
    j["rules"] = Json::array();
    Json threats = Json::array();
    for (const auto& c : checks) {
        j["rules"].push_back(
            {{"name", c.name}, {"verdict", to_string(c.verdict)}, {"witnesses", witnesses_json(model, c.witnesses)}});
        if (c.verdict == SatResult::Sat) threats.push_back(c.name);
    }
    j["threats"] = std::move(threats);
    return dump(j);
}

std::string check_text(const SystemModel& model, const std::vector<RuleCheck>& checks) {
    std::ostringstream out;
    std::size_t found = 0;
    for (const auto& c : checks) {
        if (c.verdict == SatResult::Unsat) continue;
        if (c.verdict == SatResult::Unknown) {
            out << "? " << c.name << " (undecided within the conflict budget)\n";
            continue;
        }
        ++found;
        out << "! " << c.name << "\n";
        for (const auto& w : c.witnesses) out << "    " << witness_text(model, w) << "\n";
    }
    out << found << " of " << checks.size() << " rules match (" << check_status(checks) << ")\n";
    return out.str();
}

std::string explain_json(const SystemModel& model, const RuleSet& rules, const std::vector<RuleCheck>& checks) {
    Json j = Json::array();
    const std::size_t n = model.elements().size();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        j.push_back({{"name", rules[i].name},
                     {"verdict", to_string(checks[i].verdict)},
                     {"attributeRepairable", has_attr(rules[i].formula)},
                     {"formula", print_rule(rules[i].formula)},
                     {"pathFree", to_string(translate(rules[i].formula, n))},
                     {"witnesses", witnesses_json(model, checks[i].witnesses)}});
    }
    return dump(Json{{"rules", std::move(j)}});
}

std::string explain_text(const SystemModel& model, const RuleSet& rules, const std::vector<RuleCheck>& checks) {
    std::ostringstream out;
    const std::size_t n = model.elements().size();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const bool attr = has_attr(rules[i].formula);
        out << "rule " << rules[i].name << ": " << to_string(checks[i].verdict) << "\n";
        out << "  formula:   " << print_rule(rules[i].formula) << "\n";
        out << "  path-free: " << to_string(translate(rules[i].formula, n)) << "\n";
        if (checks[i].verdict != SatResult::Sat) continue;
        out << "  " << (attr ? "attribute changes may remove it" : "no attribute change can remove it") << "\n";
        for (const auto& w : checks[i].witnesses) out << "    " << witness_text(model, w) << "\n";
    }
    return out.str();
}

}  // namespace threatfix
