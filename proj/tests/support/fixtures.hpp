#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"

namespace tftest {

inline std::string read_data(const std::string& name) {
    std::ifstream in(std::string(THREATFIX_DATA_DIR) + "/" + name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string data_path(const std::string& name) { return std::string(THREATFIX_DATA_DIR) + "/" + name; }

inline threatfix::SystemModel motivating_model() {
    return threatfix::load_costs(threatfix::parse_model(read_data("motivating.json")), read_data("enc.csv"));
}
inline threatfix::RuleSet motivating_rules() { return threatfix::parse_rules(read_data("two.tl")); }
inline threatfix::SystemModel smarthome_model() { return threatfix::parse_model(read_data("smarthome.json")); }
inline threatfix::RuleSet iot_rules() { return threatfix::parse_rules(read_data("iot.tl")); }

inline const threatfix::Rule& rule_named(const threatfix::RuleSet& rules, const std::string& name) {
    for (const auto& r : rules) {
        if (r.name == name) return r;
    }
    throw std::runtime_error("no rule " + name);
}

}  // namespace tftest
