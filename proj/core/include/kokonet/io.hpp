#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "kokonet/classify.hpp"
#include "kokonet/geometry.hpp"
#include "kokonet/kinematics.hpp"
#include "kokonet/qsnet.hpp"
#include "kokonet/search.hpp"

namespace kokonet {

using Json = nlohmann::ordered_json;

inline constexpr const char* kBundleSchema = "kokonet/flexion-bundle/1";

enum class AngleUnit { Degrees, Radians };

// {"unit", "alpha": [4], "beta": [4], "gamma": [4], "delta": [4]} in the given unit.
Json net_to_json(const NetAngles& net, AngleUnit unit = AngleUnit::Radians);
// Reads the four arrays; an optional "unit" ("deg" | "rad") overrides fallback.
NetAngles net_from_json(const Json& j, AngleUnit fallback);

Json state_to_json(const DihedralState& s);
DihedralState state_from_json(const Json& j, AngleUnit unit);

Json report_to_json(const ClassificationReport& r);
Json exclusivity_to_json(const ExclusivityReport& r);
Json rigidity_to_json(const RigidityReport& r);
Json lengths_to_json(const EdgeLengths& l);
EdgeLengths lengths_from_json(const Json& j);

// Solutions carry angles in radians and degrees, rounded to 15 significant digits.
Json solution_to_json(const VerifiedSolution& s);
Json search_result_to_json(const SearchResult& r);
Json params_to_json(const SearchParameters& p);

SearchConfig search_config_from_json(const Json& j);
Json search_config_to_json(const SearchConfig& c);

// Bundle numbers are written at full precision and round-trip exactly.
Json bundle_to_json(const FlexionBundle& b);
FlexionBundle bundle_from_json(const Json& j);
Json bundle_check_to_json(const BundleCheck& c);

std::string obj_text(const EmbeddedNet& e, const NetAngles& net, const DihedralState& state);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);
Json read_json(const std::string& path);

void export_obj(const EmbeddedNet& e, const NetAngles& net, const DihedralState& state,
                const std::string& path);
void export_bundle(const FlexionBundle& b, const std::string& path);
FlexionBundle import_bundle(const std::string& path);

// Rounds to the given number of significant digits.
double round_sig(double x, int digits);

}  // namespace kokonet
