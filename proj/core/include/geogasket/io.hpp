#pragma once

// Scene files, system export/import, schema checking and SVG output.
// JSON documents follow schemas/scene.schema.json and schemas/system.schema.json.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geogasket/errors.hpp"
#include "geogasket/gasket.hpp"
#include "geogasket/surface.hpp"

namespace geogasket {

/// A document that parses as JSON but breaks its schema. Every violation is
/// listed as "<json pointer>: <message>".
class SchemaError : public DomainError {
public:
    explicit SchemaError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct SurfaceSpec {
    SurfaceKind kind = SurfaceKind::euclidean;
    // Custom surfaces only.
    ChartRect chart;
    std::string E = "1", F = "0", G = "1";
    int sample_grid = 21;
};

Surface make_surface(const SurfaceSpec& spec, const GeodesicOptions& options = {});

struct SceneConfig {
    std::string name;
    SurfaceSpec surface;
    std::array<SurfacePoint, 3> vertices{};
    int depth = 6;
    std::optional<double> delta;
    int branching = 3;
    /// Absent: calibrate from the built system.
    std::optional<double> gauge_constant;
    std::uint64_t seed = 0;
    std::size_t audit_samples = 128;
    int audit_levels = 4;
    /// Controlled-Moran band D = moran_band / |Delta|.
    double moran_band = 4.0;
    GeodesicOptions tolerances;
};

/// Schema violations against a schema given as JSON text. Empty when valid.
/// Throws ParseError when either text is not JSON.
std::vector<std::string> schema_violations(std::string_view document, std::string_view schema);

/// The shipped schemas, embedded at build time.
std::string_view scene_schema();
std::string_view system_schema();

/// Throws ParseError for malformed JSON and SchemaError for schema violations.
SceneConfig parse_scene(std::string_view json_text);
std::string scene_to_json(const SceneConfig& scene);

/// Base triangle on the scene's surface.
GeodesicTriangle build_base(const SceneConfig& scene);

struct CellRecord {
    MultiIndex index;
    std::array<SurfacePoint, 3> vertices{};
};

struct SystemFile {
    SceneConfig scene;
    int depth = 0;
    int branching = 3;
    double diameter = 0.0;
    double nu = 0.0;
    std::optional<double> gauge_constant;
    std::vector<CellRecord> cells;  // finest level
};

/// Export with the finest-level cells; doubles in shortest round-trip form,
/// so equal inputs give byte-identical output.
std::string system_to_json(const TriangleSystem& sys, const SceneConfig& scene);

/// Throws ParseError / SchemaError like parse_scene.
SystemFile parse_system(std::string_view json_text);

/// Stroke-only SVG 1.1 of the level-n cells in chart coordinates, 1024 x 1024.
void write_svg(std::ostream& out, const TriangleSystem& sys, int level);

}  // namespace geogasket
