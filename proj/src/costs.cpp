#include <charconv>
#include <cstdlib>
#include <tuple>
#include <limits>

#include "threatfix/error.hpp"
#include "threatfix/model.hpp"

namespace threatfix {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::int64_t parse_int(std::string_view s, std::string_view whole) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw ParseError("invalid cost '" + std::string(whole) + "'");
    }
    return v;
}

// Splits one CSV record; fields may be double-quoted with "" as escape.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            out.push_back(was_quoted ? field : std::string(trim(field)));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(ch);
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no, line.size() + 1);
    out.push_back(was_quoted ? field : std::string(trim(field)));
    return out;
}

}  // namespace

Cost parse_cost(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.empty()) throw ParseError("empty cost");
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        const auto num = parse_int(trim(s.substr(0, slash)), s);
        const auto den = parse_int(trim(s.substr(slash + 1)), s);
        if (den == 0) throw ParseError("cost '" + std::string(s) + "' has zero denominator");
        return Cost(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        const std::string_view whole = s.substr(0, dot);
        const std::string_view frac = s.substr(dot + 1);
        const bool negative = !whole.empty() && whole.front() == '-';
        if (frac.empty() || frac.size() > 12) throw ParseError("invalid cost '" + std::string(s) + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t ip = (whole.empty() || whole == "-") ? 0 : parse_int(whole, s);
        const std::int64_t fp = parse_int(frac, s);
        if (fp < 0) throw ParseError("invalid cost '" + std::string(s) + "'");
        if (std::abs(ip) > std::numeric_limits<std::int64_t>::max() / den - 1) {
            throw ParseError("cost '" + std::string(s) + "' out of range");
        }
        const std::int64_t mag = std::abs(ip) * den + fp;
        return Cost(negative ? -mag : mag, den);
    }
    return Cost(parse_int(s, s));
}

std::string to_string(const Cost& cost) {
    if (cost.denominator() == 1) return std::to_string(cost.numerator());
    return std::to_string(cost.numerator()) + "/" + std::to_string(cost.denominator());
}

SystemModel load_costs(const SystemModel& model, std::string_view csv_text) {
    const MetaModel& meta = model.meta();
    CostTable table = model.costs();

    struct Row {
        std::vector<CellId> cells;
        ValueId from;
        ValueId to;
        Cost cost;
        bool wildcard;
    };
    std::vector<Row> rows;

    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= csv_text.size()) {
        const auto nl = csv_text.find('\n', pos);
        const std::string_view raw =
            csv_text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? csv_text.size() + 1 : nl + 1;
        ++line_no;
        std::string_view line = trim(raw);
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line.empty()) continue;
        auto fields = split_record(line, line_no);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() == 5 && fields[0] == "item" && fields[1] == "attribute" && fields[2] == "from" &&
                fields[3] == "to" && fields[4] == "cost") {
                continue;
            }
            throw ParseError("cost CSV must start with header 'item,attribute,from,to,cost'", line_no, 1);
        }
        if (fields.size() != 5) {
            throw ParseError("expected 5 fields, found " + std::to_string(fields.size()), line_no, 1);
        }
        const auto& [item_name, attr_name, from_name, to_name, cost_text] =
            std::tie(fields[0], fields[1], fields[2], fields[3], fields[4]);

        const auto attr = meta.find_attribute(attr_name);
        if (!attr) throw SchemaError("cost row " + std::to_string(line_no) + ": unknown attribute '" + attr_name + "'");
        const auto from = meta.find_value(*attr, from_name);
        const auto to = meta.find_value(*attr, to_name);
        if (!from) throw SchemaError("cost row " + std::to_string(line_no) + ": '" + from_name + "' not in domain of '" + attr_name + "'");
        if (!to) throw SchemaError("cost row " + std::to_string(line_no) + ": '" + to_name + "' not in domain of '" + attr_name + "'");

        Cost cost;
        try {
            cost = parse_cost(cost_text);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no, 1);
        }
        if (cost < 0) throw SchemaError("cost row " + std::to_string(line_no) + ": negative cost " + to_string(cost));
        if (*from == *to && cost != Cost(0)) {
            throw SchemaError("cost row " + std::to_string(line_no) + ": keeping a value must cost 0");
        }

        Row row{{}, *from, *to, cost, item_name == "*"};
        if (row.wildcard) {
            for (CellId c = 0; c < model.cells().size(); ++c) {
                if (model.cells()[c].attr == *attr) row.cells.push_back(c);
            }
        } else {
            const auto item = model.find(item_name);
            if (!item) throw SchemaError("cost row " + std::to_string(line_no) + ": unknown item '" + item_name + "'");
            const auto cell = model.cell(*item, *attr);
            if (!cell) {
                throw SchemaError("cost row " + std::to_string(line_no) + ": attribute '" + attr_name +
                                  "' does not apply to item '" + item_name + "'");
            }
            row.cells.push_back(*cell);
        }
        rows.push_back(std::move(row));
    }

    // Wildcard rows first, then item rows, each in file order.
    for (const bool wildcard_pass : {true, false}) {
        for (const auto& r : rows) {
            if (r.wildcard != wildcard_pass) continue;
            for (CellId c : r.cells) {
                const auto d = model.domain(c).size();
                table[c][r.from * d + r.to] = r.cost;
            }
        }
    }
    return model.with_costs(std::move(table));
}

}  // namespace threatfix
