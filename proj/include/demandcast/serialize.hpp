#pragma once

#include "demandcast/arimax.hpp"
#include "demandcast/features.hpp"
#include "demandcast/gbdt.hpp"
#include "demandcast/prophet_like.hpp"
#include "demandcast/svr.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace demandcast {

using Json = nlohmann::ordered_json;

std::string to_string(DeviationMode mode);
DeviationMode parse_deviation_mode(const std::string& text);
std::string to_string(Granularity g);
Granularity parse_granularity(const std::string& text);

void to_json(Json& j, const Date& d);
void from_json(const Json& j, Date& d);
void to_json(Json& j, const DeviationConfig& c);
void from_json(const Json& j, DeviationConfig& c);
void to_json(Json& j, const FeatureSpec& s);
void from_json(const Json& j, FeatureSpec& s);
void to_json(Json& j, const GbdtConfig& c);
void from_json(const Json& j, GbdtConfig& c);
void to_json(Json& j, const ArimaxConfig& c);
void from_json(const Json& j, ArimaxConfig& c);
void to_json(Json& j, const ProphetConfig& c);
void from_json(const Json& j, ProphetConfig& c);
void to_json(Json& j, const SvrConfig& c);
void from_json(const Json& j, SvrConfig& c);

void to_json(Json& j, const GbdtModel& m);
void from_json(const Json& j, GbdtModel& m);
void to_json(Json& j, const ArimaxModel& m);
void from_json(const Json& j, ArimaxModel& m);
void to_json(Json& j, const ProphetLikeModel& m);
void from_json(const Json& j, ProphetLikeModel& m);
void to_json(Json& j, const SvrModel& m);
void from_json(const Json& j, SvrModel& m);

/// Self-describing model document: kind, training feature spec, parameters.
template <typename Model>
Json model_artifact(const std::string& kind, const FeatureSpec& features, const Model& model) {
    Json j;
    j["format"] = "demandcast-model";
    j["version"] = 1;
    j["model"] = kind;
    j["feature_spec"] = features;
    j["params"] = model;
    return j;
}

void write_json_file(const std::filesystem::path& path, const Json& doc);
Json read_json_file(const std::filesystem::path& path);

} // namespace demandcast
