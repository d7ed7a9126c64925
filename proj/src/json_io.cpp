#include "tilingaf/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tilingaf {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw ParseError(what); }

// Maps a byte offset into (line, column), both 1-based.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

FieldElem fe_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return FieldElem::parse(j.get<std::string>());
    if (j.is_number_integer()) return FieldElem(static_cast<long>(j.get<long long>()));
    parse_fail(where + ": expected a field-element string or integer, got " + j.dump());
}

Vec2 vec_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        parse_fail(where + ": expected [x, y], got " + j.dump());
    return Vec2(fe_from_json(j[0], where + "[0]"), fe_from_json(j[1], where + "[1]"));
}

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) parse_fail(where + ": missing required key \"" + key + "\"");
    return *it;
}

}  // namespace

SubstSystem load_system_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
    if (!doc.is_object()) parse_fail("system file: top level must be an object");

    SubstSystem s;
    const json& field = need(doc, "field", "system file");
    if (field.is_string()) {
        if (field.get<std::string>() != "rational")
            parse_fail("field: expected \"rational\" or {\"sqrt\": d}, got " + field.dump());
        s.field_d = 0;
    } else if (field.is_object() && field.contains("sqrt")) {
        const json& d = field["sqrt"];
        if (!d.is_number_integer()) parse_fail("field.sqrt: expected an integer");
        s.field_d = static_cast<long>(d.get<long long>());
        if (s.field_d < 2 || !is_square_free(s.field_d))
            parse_fail("field.sqrt: " + std::to_string(s.field_d) +
                       " is not a square-free integer >= 2");
    } else {
        parse_fail("field: expected \"rational\" or {\"sqrt\": d}, got " + field.dump());
    }

    s.lambda = fe_from_json(need(doc, "lambda", "system file"), "lambda");

    const json& protos = need(doc, "prototiles", "system file");
    if (!protos.is_array() || protos.empty())
        parse_fail("prototiles: expected a non-empty array");
    for (const json& pj : protos) {
        if (!pj.is_object()) parse_fail("prototiles: entries must be objects");
        const json& idj = need(pj, "id", "prototile");
        if (!idj.is_string()) parse_fail("prototile id must be a string");
        std::string id = idj.get<std::string>();
        std::string label = id;
        if (pj.contains("label")) {
            if (!pj["label"].is_string()) parse_fail("prototile '" + id + "': label must be a string");
            label = pj["label"].get<std::string>();
        }
        const json& vj = need(pj, "vertices", "prototile '" + id + "'");
        if (!vj.is_array()) parse_fail("prototile '" + id + "': vertices must be an array");
        std::vector<Vec2> vs;
        for (const json& v : vj) vs.push_back(vec_from_json(v, "vertex of '" + id + "'"));
        try {
            s.prototiles.push_back({id, label, Polygon(std::move(vs))});
        } catch (const ParseError& e) {
            parse_fail("prototile '" + id + "': " + e.what());
        }
    }

    const json& rule = need(doc, "rule", "system file");
    if (!rule.is_object()) parse_fail("rule: expected an object keyed by prototile id");
    for (const Prototile& p : s.prototiles) {
        auto it = rule.find(p.id);
        if (it == rule.end()) parse_fail("rule: missing entry for prototile '" + p.id + "'");
        if (!it->is_array() || it->empty())
            parse_fail("rule of '" + p.id + "': expected a non-empty array of tiles");
        std::vector<Tile> tiles;
        for (const json& tj : *it) {
            if (!tj.is_object()) parse_fail("rule of '" + p.id + "': entries must be objects");
            const json& protoj = need(tj, "proto", "rule of '" + p.id + "'");
            if (!protoj.is_string()) parse_fail("rule of '" + p.id + "': proto must be a string");
            tiles.push_back({protoj.get<std::string>(),
                             vec_from_json(need(tj, "pos", "rule of '" + p.id + "'"),
                                           "rule of '" + p.id + "' pos")});
        }
        s.rules.push_back(std::move(tiles));
    }
    for (auto it = rule.begin(); it != rule.end(); ++it)
        if (!s.has_proto(it.key())) parse_fail("rule: unknown prototile '" + it.key() + "'");

    if (doc.contains("asserted")) {
        const json& a = doc["asserted"];
        if (!a.is_object()) parse_fail("asserted: expected an object");
        if (a.contains("aperiodic")) {
            if (!a["aperiodic"].is_boolean()) parse_fail("asserted.aperiodic: expected a boolean");
            s.asserted_aperiodic = a["aperiodic"].get<bool>();
        }
        if (a.contains("fpc")) {
            if (!a["fpc"].is_boolean()) parse_fail("asserted.fpc: expected a boolean");
            s.asserted_fpc = a["fpc"].get<bool>();
        }
    }
    return s;
}

SubstSystem load_system_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open system file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_system_string(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string save_system_string(const SubstSystem& s) {
    ordered_json doc;
    if (s.field_d == 0) {
        doc["field"] = "rational";
    } else {
        doc["field"] = ordered_json{{"sqrt", s.field_d}};
    }
    doc["lambda"] = s.lambda.str();
    ordered_json protos = ordered_json::array();
    for (const Prototile& p : s.prototiles) {
        ordered_json vs = ordered_json::array();
        for (const Vec2& v : p.shape.vertices())
            vs.push_back(ordered_json::array({v.x.str(), v.y.str()}));
        protos.push_back(ordered_json{{"id", p.id}, {"label", p.label}, {"vertices", vs}});
    }
    doc["prototiles"] = std::move(protos);
    ordered_json rule = ordered_json::object();
    for (std::size_t i = 0; i < s.prototiles.size(); ++i) {
        ordered_json tiles = ordered_json::array();
        for (const Tile& t : s.rules[i])
            tiles.push_back(ordered_json{
                {"proto", t.proto},
                {"pos", ordered_json::array({t.pos.x.str(), t.pos.y.str()})}});
        rule[s.prototiles[i].id] = std::move(tiles);
    }
    doc["rule"] = std::move(rule);
    doc["asserted"] = ordered_json{{"aperiodic", s.asserted_aperiodic}, {"fpc", s.asserted_fpc}};
    return doc.dump(2) + "\n";
}

void save_system_file(const SubstSystem& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write system file '" + path + "'");
    out << save_system_string(s);
}

}  // namespace tilingaf
