#include <json.hpp>

#include "threatfix/error.hpp"
#include "threatfix/model.hpp"

namespace threatfix {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based offset of the offending character.
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("invalid JSON: " + std::string(e.what()), line, column);
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(where + ": missing key '" + key + "'");
    }
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw SchemaError(where + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& where,
                                     bool optional = false) {
    if (optional && (!obj.is_object() || !obj.contains(key))) return {};
    const json& v = require(obj, key, where);
    if (!v.is_array()) throw SchemaError(where + ": key '" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw SchemaError(where + ": '" + key + "' entries must be strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

ModelBuilder::Attributes attrs_of(const json& obj, const std::string& where) {
    ModelBuilder::Attributes out;
    if (!obj.contains("attrs")) return out;
    const json& a = obj.at("attrs");
    if (!a.is_object()) throw SchemaError(where + ": 'attrs' must be an object");
    for (const auto& [k, v] : a.items()) {
        if (!v.is_string()) throw SchemaError(where + ": attribute '" + k + "' value must be a string");
        out.emplace(k, v.get<std::string>());
    }
    return out;
}

const json& array_or_empty(const json& doc, const char* key) {
    static const json empty = json::array();
    if (!doc.contains(key)) return empty;
    const json& v = doc.at(key);
    if (!v.is_array()) throw SchemaError(std::string("top-level '") + key + "' must be an array");
    return v;
}

MetaModel meta_from_json(const json& meta) {
    if (!meta.is_object()) throw SchemaError("'meta' must be an object");
    MetaModel mm;
    const std::pair<const char*, ItemKind> kinds[] = {{"elementTypes", ItemKind::Element},
                                                      {"connectorTypes", ItemKind::Connector},
                                                      {"assetTypes", ItemKind::Asset},
                                                      {"boundaryTypes", ItemKind::Boundary}};
    for (const auto& [key, kind] : kinds) {
        for (const auto& t : string_list(meta, key, "meta", true)) mm.add_type(t, kind);
    }
    if (meta.contains("attributes")) {
        const json& attrs = meta.at("attributes");
        if (!attrs.is_array()) throw SchemaError("meta: 'attributes' must be an array");
        for (const auto& a : attrs) {
            const std::string name = require_string(a, "name", "meta attribute");
            const std::string where = "meta attribute '" + name + "'";
            mm.add_attribute(name, string_list(a, "domain", where), string_list(a, "appliesTo", where, true));
        }
    }
    return mm;
}

json meta_to_json(const MetaModel& mm) {
    json meta = json::object();
    meta["elementTypes"] = mm.types(ItemKind::Element);
    meta["connectorTypes"] = mm.types(ItemKind::Connector);
    meta["assetTypes"] = mm.types(ItemKind::Asset);
    meta["boundaryTypes"] = mm.types(ItemKind::Boundary);
    json attrs = json::array();
    for (const auto& a : mm.attributes()) {
        attrs.push_back({{"name", a.name}, {"domain", a.domain}, {"appliesTo", a.applies_to}});
    }
    meta["attributes"] = std::move(attrs);
    return meta;
}

}  // namespace

MetaModel parse_meta(std::string_view json_text) { return meta_from_json(parse_json(json_text)); }

SystemModel parse_model(std::string_view json_text) {
    const json doc = parse_json(json_text);
    if (!doc.is_object()) throw SchemaError("model document must be a JSON object");
    ModelBuilder b(meta_from_json(require(doc, "meta", "model")));

    for (const auto& e : array_or_empty(doc, "elements")) {
        const std::string id = require_string(e, "id", "element");
        const std::string where = "element '" + id + "'";
        b.element(id, require_string(e, "type", where), attrs_of(e, where));
    }
    for (const auto& c : array_or_empty(doc, "connectors")) {
        const std::string id = require_string(c, "id", "connector");
        const std::string where = "connector '" + id + "'";
        b.connector(id, require_string(c, "type", where), require_string(c, "source", where),
                    require_string(c, "target", where), attrs_of(c, where));
    }
    for (const auto& a : array_or_empty(doc, "assets")) {
        const std::string id = require_string(a, "id", "asset");
        const std::string where = "asset '" + id + "'";
        b.asset(id, require_string(a, "type", where), string_list(a, "heldBy", where, true), attrs_of(a, where));
    }
    for (const auto& bd : array_or_empty(doc, "boundaries")) {
        const std::string id = require_string(bd, "id", "boundary");
        const std::string where = "boundary '" + id + "'";
        b.boundary(id, require_string(bd, "type", where), string_list(bd, "contains", where, true),
                   attrs_of(bd, where));
    }
    return b.build();
}

std::string serialize_model(const SystemModel& m) {
    json doc = json::object();
    doc["meta"] = meta_to_json(m.meta());

    auto attrs = [&](ItemId i) {
        json a = json::object();
        for (CellId c = 0; c < m.cells().size(); ++c) {
            if (m.cells()[c].item != i) continue;
            a[m.meta().attribute(m.cells()[c].attr).name] = m.value_name(c, m.valuation()[c]);
        }
        return a;
    };

    json elements = json::array();
    for (ItemId e : m.elements()) {
        elements.push_back({{"id", m.id(e)}, {"type", m.item(e).type}, {"attrs", attrs(e)}});
    }
    json connectors = json::array();
    for (ItemId c : m.connectors()) {
        connectors.push_back({{"id", m.id(c)},
                              {"type", m.item(c).type},
                              {"source", m.id(m.source(c))},
                              {"target", m.id(m.target(c))},
                              {"attrs", attrs(c)}});
    }
    json assets = json::array();
    for (ItemId a : m.assets()) {
        json held = json::array();
        for (ItemId h = 0; h < m.items().size(); ++h) {
            if (m.holds(h, a)) held.push_back(m.id(h));
        }
        assets.push_back({{"id", m.id(a)}, {"type", m.item(a).type}, {"heldBy", held}, {"attrs", attrs(a)}});
    }
    json boundaries = json::array();
    for (ItemId bd : m.boundaries()) {
        json children = json::array();
        for (ItemId x = 0; x < m.items().size(); ++x) {
            if (m.parent(x) == bd) children.push_back(m.id(x));
        }
        boundaries.push_back(
            {{"id", m.id(bd)}, {"type", m.item(bd).type}, {"contains", children}, {"attrs", attrs(bd)}});
    }
    doc["elements"] = std::move(elements);
    doc["connectors"] = std::move(connectors);
    doc["assets"] = std::move(assets);
    doc["boundaries"] = std::move(boundaries);
    return doc.dump(2) + "\n";
}

}  // namespace threatfix
