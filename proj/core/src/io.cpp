#include "geogasket/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <regex>

#include <json.hpp>

#include "geogasket/errors.hpp"
#include "geogasket/expr.hpp"
#include "geogasket/parallel.hpp"
#include "schemas_embedded.hpp"

namespace geogasket {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "document does not match its schema";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Byte offset to line/column for the error message.
        int line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed JSON", line, col);
    }
}

std::string pointer_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

bool has_type(const json& doc, const std::string& type) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "boolean") return doc.is_boolean();
    if (type == "null") return doc.is_null();
    if (type == "number") return doc.is_number();
    if (type == "integer") {
        if (doc.is_number_integer()) return true;
        if (!doc.is_number_float()) return false;
        const double x = doc.get<double>();
        return std::isfinite(x) && std::floor(x) == x;
    }
    return false;
}

// The draft 2020-12 keywords the shipped schemas use.
void validate(const json& doc, const json& schema, const std::string& at,
              std::vector<std::string>& out) {
    const std::string where = at.empty() ? "/" : at;
    if (schema.is_boolean()) {
        if (!schema.get<bool>()) out.push_back(where + ": not allowed");
        return;
    }
    if (auto it = schema.find("type"); it != schema.end()) {
        bool ok = false;
        if (it->is_string()) {
            ok = has_type(doc, it->get<std::string>());
        } else {
            for (const auto& t : *it) ok = ok || has_type(doc, t.get<std::string>());
        }
        if (!ok) {
            out.push_back(where + ": expected type " + it->dump());
            return;
        }
    }
    if (auto it = schema.find("const"); it != schema.end() && doc != *it) {
        out.push_back(where + ": expected " + it->dump());
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
        if (std::find(it->begin(), it->end(), doc) == it->end()) {
            out.push_back(where + ": expected one of " + it->dump());
        }
    }
    if (doc.is_number()) {
        const double x = doc.get<double>();
        if (auto it = schema.find("minimum"); it != schema.end() && !(x >= it->get<double>()))
            out.push_back(where + ": below minimum " + it->dump());
        if (auto it = schema.find("maximum"); it != schema.end() && !(x <= it->get<double>()))
            out.push_back(where + ": above maximum " + it->dump());
        if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && !(x > it->get<double>()))
            out.push_back(where + ": must exceed " + it->dump());
        if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && !(x < it->get<double>()))
            out.push_back(where + ": must be below " + it->dump());
    }
    if (doc.is_string()) {
        const auto& s = doc.get_ref<const std::string&>();
        if (auto it = schema.find("minLength"); it != schema.end() && s.size() < it->get<std::size_t>())
            out.push_back(where + ": shorter than " + it->dump());
        if (auto it = schema.find("pattern"); it != schema.end()) {
            if (!std::regex_search(s, std::regex(it->get<std::string>(), std::regex::ECMAScript))) {
                out.push_back(where + ": does not match " + it->dump());
            }
        }
    }
    if (doc.is_array()) {
        if (auto it = schema.find("minItems"); it != schema.end() && doc.size() < it->get<std::size_t>())
            out.push_back(where + ": fewer than " + it->dump() + " items");
        if (auto it = schema.find("maxItems"); it != schema.end() && doc.size() > it->get<std::size_t>())
            out.push_back(where + ": more than " + it->dump() + " items");
        if (auto it = schema.find("items"); it != schema.end()) {
            for (std::size_t i = 0; i < doc.size(); ++i)
                validate(doc[i], *it, at + "/" + std::to_string(i), out);
        }
    }
    if (doc.is_object()) {
        if (auto it = schema.find("required"); it != schema.end()) {
            for (const auto& key : *it) {
                if (!doc.contains(key.get<std::string>()))
                    out.push_back(where + ": missing required property " + key.dump());
            }
        }
        const auto props = schema.find("properties");
        const auto extra = schema.find("additionalProperties");
        for (const auto& [key, value] : doc.items()) {
            const std::string child = at + "/" + pointer_token(key);
            if (props != schema.end() && props->contains(key)) {
                validate(value, (*props)[key], child, out);
            } else if (extra != schema.end()) {
                if (extra->is_boolean() && !extra->get<bool>()) {
                    out.push_back(child + ": unknown property");
                } else if (extra->is_object()) {
                    validate(value, *extra, child, out);
                }
            }
        }
    }
    if (auto it = schema.find("allOf"); it != schema.end()) {
        for (const auto& sub : *it) validate(doc, sub, at, out);
    }
    if (auto it = schema.find("if"); it != schema.end()) {
        std::vector<std::string> probe;
        validate(doc, *it, at, probe);
        const char* branch = probe.empty() ? "then" : "else";
        if (auto b = schema.find(branch); b != schema.end()) validate(doc, *b, at, out);
    }
}

std::vector<std::string> violations_of(const json& doc, std::string_view schema_text) {
    std::vector<std::string> out;
    validate(doc, json::parse(schema_text), "", out);
    return out;
}

std::array<SurfacePoint, 3> read_vertices(const json& j) {
    std::array<SurfacePoint, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) v[i] = {j[i][0].get<double>(), j[i][1].get<double>()};
    return v;
}

json write_vertices(const std::array<SurfacePoint, 3>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.u, p.v});
    return a;
}

SceneConfig scene_from(const json& j) {
    SceneConfig s;
    s.name = j.value("name", "");
    const auto& sj = j.at("surface");
    s.surface.kind = surface_kind_from_string(sj.at("kind").get<std::string>());
    if (auto c = sj.find("chart"); c != sj.end()) {
        s.surface.chart = {c->at("u_min").get<double>(), c->at("u_max").get<double>(),
                           c->at("v_min").get<double>(), c->at("v_max").get<double>()};
    }
    s.surface.E = sj.value("E", "1");
    s.surface.F = sj.value("F", "0");
    s.surface.G = sj.value("G", "1");
    s.surface.sample_grid = sj.value("sample_grid", 21);
    s.vertices = read_vertices(j.at("vertices"));
    s.depth = j.value("depth", 6);
    if (j.contains("delta")) s.delta = j["delta"].get<double>();
    s.branching = j.value("branching", 3);
    if (j.contains("gauge_constant")) s.gauge_constant = j["gauge_constant"].get<double>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (auto a = j.find("audit"); a != j.end()) {
        s.audit_samples = a->value("samples", s.audit_samples);
        s.audit_levels = a->value("levels", s.audit_levels);
    }
    s.moran_band = j.value("moran_band", 4.0);
    if (auto t = j.find("tolerances"); t != j.end()) {
        s.tolerances.abs_tol = t->value("abs_tol", s.tolerances.abs_tol);
        s.tolerances.rel_tol = t->value("rel_tol", s.tolerances.rel_tol);
        s.tolerances.residual_target = t->value("residual_target", s.tolerances.residual_target);
    }
    return s;
}

ordered_json scene_json(const SceneConfig& s) {
    ordered_json j;
    if (!s.name.empty()) j["name"] = s.name;
    ordered_json sj;
    sj["kind"] = to_string(s.surface.kind);
    if (s.surface.kind == SurfaceKind::custom) {
        sj["chart"] = {{"u_min", s.surface.chart.u_min},
                       {"u_max", s.surface.chart.u_max},
                       {"v_min", s.surface.chart.v_min},
                       {"v_max", s.surface.chart.v_max}};
        sj["E"] = s.surface.E;
        sj["F"] = s.surface.F;
        sj["G"] = s.surface.G;
        sj["sample_grid"] = s.surface.sample_grid;
    }
    j["surface"] = sj;
    j["vertices"] = write_vertices(s.vertices);
    j["depth"] = s.depth;
    if (s.delta) j["delta"] = *s.delta;
    j["branching"] = s.branching;
    if (s.gauge_constant) j["gauge_constant"] = *s.gauge_constant;
    j["seed"] = s.seed;
    j["audit"] = {{"samples", s.audit_samples}, {"levels", s.audit_levels}};
    j["moran_band"] = s.moran_band;
    j["tolerances"] = {{"abs_tol", s.tolerances.abs_tol},
                       {"rel_tol", s.tolerances.rel_tol},
                       {"residual_target", s.tolerances.residual_target}};
    return j;
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> violations)
    : DomainError(join_violations(violations)), violations_(std::move(violations)) {}

Surface make_surface(const SurfaceSpec& spec, const GeodesicOptions& options) {
    switch (spec.kind) {
        case SurfaceKind::euclidean: return Surface::euclidean().with_options(options);
        case SurfaceKind::sphere_unit: return Surface::sphere_unit().with_options(options);
        case SurfaceKind::hyperbolic_poincare:
            return Surface::hyperbolic_poincare().with_options(options);
        case SurfaceKind::custom:
            return Surface::custom(spec.chart, Expression::parse(spec.E), Expression::parse(spec.F),
                                   Expression::parse(spec.G), spec.sample_grid)
                .with_options(options);
    }
    throw DomainError("unknown surface kind");
}

std::vector<std::string> schema_violations(std::string_view document, std::string_view schema) {
    const json doc = parse_json(document);
    parse_json(schema);
    return violations_of(doc, schema);
}

std::string_view scene_schema() { return embedded::scene_schema; }
std::string_view system_schema() { return embedded::system_schema; }

SceneConfig parse_scene(std::string_view json_text) {
    const json j = parse_json(json_text);
    if (auto v = violations_of(j, scene_schema()); !v.empty()) throw SchemaError(std::move(v));
    return scene_from(j);
}

std::string scene_to_json(const SceneConfig& scene) { return scene_json(scene).dump(2) + "\n"; }

GeodesicTriangle build_base(const SceneConfig& scene) {
    const Surface surface = make_surface(scene.surface, scene.tolerances);
    return GeodesicTriangle::build(surface, scene.vertices[0], scene.vertices[1], scene.vertices[2]);
}

std::string system_to_json(const TriangleSystem& sys, const SceneConfig& scene) {
    ordered_json j;
    j["format"] = "geogasket-system";
    j["version"] = 1;
    j["scene"] = scene_json(scene);
    j["depth"] = sys.depth();
    j["branching"] = sys.branching();
    j["diameter"] = sys.base().diameter();
    j["nu"] = sys.nu();
    if (std::isnan(sys.gauge_constant())) {
        j["gauge_constant"] = nullptr;
    } else {
        j["gauge_constant"] = sys.gauge_constant();
    }
    ordered_json levels = ordered_json::array();
    for (int n = 0; n <= sys.depth(); ++n) {
        levels.push_back({{"level", n},
                          {"cells", sys.level(n).size()},
                          {"max_diameter", sys.level_diameter(n)}});
    }
    j["levels"] = std::move(levels);
    ordered_json cells = ordered_json::array();
    const auto& finest = sys.level(sys.depth());
    for (std::size_t off = 0; off < finest.size(); ++off) {
        ordered_json v = ordered_json::array();
        for (const auto& p : finest[off].vertices()) v.push_back({p.u, p.v});
        cells.push_back({{"index", sys.index_at(sys.depth(), off).to_string()}, {"vertices", v}});
    }
    j["cells"] = std::move(cells);
    return j.dump(1) + "\n";
}

SystemFile parse_system(std::string_view json_text) {
    const json j = parse_json(json_text);
    auto v = violations_of(j, system_schema());
    if (v.empty()) {
        for (auto& s : violations_of(j["scene"], scene_schema())) v.push_back("/scene" + s);
    }
    if (!v.empty()) throw SchemaError(std::move(v));

    SystemFile f;
    f.scene = scene_from(j["scene"]);
    f.depth = j["depth"].get<int>();
    f.branching = j["branching"].get<int>();
    f.diameter = j["diameter"].get<double>();
    f.nu = j["nu"].get<double>();
    if (j.contains("gauge_constant") && !j["gauge_constant"].is_null())
        f.gauge_constant = j["gauge_constant"].get<double>();
    for (const auto& c : j["cells"]) {
        f.cells.push_back({MultiIndex::parse(c["index"].get<std::string>()), read_vertices(c["vertices"])});
    }
    return f;
}

void write_svg(std::ostream& out, const TriangleSystem& sys, int level) {
    const auto& cells = sys.level(level);
    const Surface& surface = sys.surface();
    const int samples = surface.kind() == SurfaceKind::euclidean ? 1 : 8;

    // Closed polylines along the geodesic sides, in chart coordinates.
    std::vector<std::vector<SurfacePoint>> paths(cells.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        auto& path = paths[c];
        for (int i = 0; i < 3; ++i) {
            // Side (i+2) runs from vertex i to vertex i+1.
            const GeodesicSegment side = cells[c].side((i + 2) % 3);
            for (int k = 0; k < samples; ++k) path.push_back(side.at(surface, static_cast<double>(k) / samples));
        }
    });

    double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
    for (const auto& path : paths) {
        for (const auto& p : path) {
            umin = std::min(umin, p.u);
            umax = std::max(umax, p.u);
            vmin = std::min(vmin, p.v);
            vmax = std::max(vmax, p.v);
        }
    }
    constexpr double size = 1024.0, margin = 16.0;
    const double span = std::max({umax - umin, vmax - vmin, 1e-300});
    const double scale = (size - 2.0 * margin) / span;
    const double ou = margin + 0.5 * (size - 2.0 * margin - scale * (umax - umin));
    const double ov = margin + 0.5 * (size - 2.0 * margin - scale * (vmax - vmin));

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"1024\" height=\"1024\" "
           "viewBox=\"0 0 1024 1024\">\n"
        << "<g fill=\"none\" stroke=\"#000000\" stroke-width=\"0.5\" stroke-linejoin=\"round\">\n";
    char buf[64];
    for (const auto& path : paths) {
        out << "<path d=\"";
        for (std::size_t k = 0; k < path.size(); ++k) {
            const double x = ou + scale * (path[k].u - umin);
            const double y = size - (ov + scale * (path[k].v - vmin));
            std::snprintf(buf, sizeof buf, "%s%.3f %.3f", k == 0 ? "M" : " L", x, y);
            out << buf;
        }
        out << " Z\"/>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace geogasket
