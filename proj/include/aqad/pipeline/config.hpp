#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aqad::pipeline {

enum class BlockKind { transform, learning };

std::string_view to_string(BlockKind k) noexcept;

using ParamValue = std::variant<std::int64_t, double, std::string>;

enum class ParamType { integer, real, choice };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::integer;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;
  ParamValue default_value;
  std::string description;
};

// What a block consumes and produces; used to check ordering.
enum class Facet { raw, regular, features, complete, normalized, windows, predictions, errors, smoothed, events };

std::string_view to_string(Facet f) noexcept;

struct BlockInfo {
  std::string name;
  BlockKind kind = BlockKind::transform;
  std::vector<ParamSpec> params;
  std::vector<Facet> requires_facets;
  std::vector<Facet> provides_facets;
  std::string description;

  const ParamSpec* find_param(std::string_view param) const;
};

/// The fixed set of blocks a pipeline may be built from.
const std::vector<BlockInfo>& registry();
const BlockInfo* find_block(std::string_view name);

struct BlockSpec {
  std::string name;
  std::map<std::string, ParamValue> params;
};

struct PipelineConfig {
  std::int64_t interval_seconds = 3600;
  double split = 0.5;  // fraction of windows used for training and normalization
  std::vector<BlockSpec> blocks;

  const BlockSpec* find(std::string_view block) const;
};

/// resample -> join_weather -> impute -> normalize -> window ->
/// lstm_regressor -> errors -> smooth -> find_anomaly, all defaults.
PipelineConfig default_config();

struct Violation {
  std::string field;
  std::string message;
};

/// Registry membership, parameter types and ranges, block ordering. Never
/// throws; an empty result means the config is valid.
std::vector<Violation> validate(const PipelineConfig& config);

/// Structured-text form:
///   {"interval": 3600, "split": 0.5,
///    "blocks": [{"name": "window", "params": {"l_s": 24}}, ...]}
/// Throws InvalidConfig on structural problems (wrong JSON types).
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);

/// Config with every declared parameter filled in and coerced to its
/// declared type. Requires a valid config.
PipelineConfig canonicalize(const PipelineConfig& config);

/// SHA-256 of the canonical form; insensitive to key order and to spelling
/// out defaults.
std::string config_hash(const PipelineConfig& config);

/// Parameter of a block in a canonical config, falling back to the
/// registry default when absent.
std::int64_t param_int(const PipelineConfig& config, std::string_view block, std::string_view name);
double param_real(const PipelineConfig& config, std::string_view block, std::string_view name);
std::string param_choice(const PipelineConfig& config, std::string_view block, std::string_view name);

// Block names, kinds, facets and parameter schemas (type, range, default).
nlohmann::json registry_to_json();
nlohmann::json violations_to_json(const std::vector<Violation>& violations);

}  // namespace aqad::pipeline
