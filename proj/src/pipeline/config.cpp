#include "aqad/pipeline/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "aqad/core/error.hpp"
#include "aqad/core/hash.hpp"

namespace aqad::pipeline {
namespace {

using nlohmann::json;

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string range_text(const ParamSpec& p) {
  return "[" + format_number(p.min) + ", " + format_number(p.max) + "]";
}

std::optional<std::string> check_param(const ParamSpec& spec, const ParamValue& value) {
  switch (spec.type) {
    case ParamType::integer: {
      const auto* v = std::get_if<std::int64_t>(&value);
      if (!v) return spec.name + " must be an integer in " + range_text(spec);
      if (*v < spec.min || *v > spec.max) return spec.name + " must be in " + range_text(spec);
      return std::nullopt;
    }
    case ParamType::real: {
      double v = 0.0;
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        v = static_cast<double>(*i);
      } else if (const auto* d = std::get_if<double>(&value)) {
        v = *d;
      } else {
        return spec.name + " must be a number in " + range_text(spec);
      }
      if (!std::isfinite(v) || v < spec.min || v > spec.max) return spec.name + " must be in " + range_text(spec);
      return std::nullopt;
    }
    case ParamType::choice: {
      const auto* s = std::get_if<std::string>(&value);
      if (!s || std::find(spec.choices.begin(), spec.choices.end(), *s) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        return spec.name + " must be one of {" + all + "}";
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

json value_to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

ParamValue value_from_json(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(Errc::InvalidConfig, where + " must be a number or string");
}

// Explicit or default numeric value of a parameter; nullopt when mistyped.
std::optional<double> numeric_param(const BlockSpec& b, const std::string& name) {
  const ParamSpec* spec = find_block(b.name)->find_param(name);
  auto it = b.params.find(name);
  const ParamValue& v = it == b.params.end() ? spec->default_value : it->second;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::nullopt;
}

const BlockSpec* require_block(const PipelineConfig& c, std::string_view block) {
  const BlockSpec* b = c.find(block);
  if (!b) throw Error(Errc::InvalidConfig, "pipeline has no block " + std::string(block));
  return b;
}

ParamValue lookup(const PipelineConfig& c, std::string_view block, std::string_view name) {
  const BlockSpec* b = require_block(c, block);
  const BlockInfo* info = find_block(block);
  const ParamSpec* spec = info ? info->find_param(name) : nullptr;
  if (!spec) throw Error(Errc::InvalidConfig, std::string(block) + " has no parameter " + std::string(name));
  auto it = b->params.find(std::string(name));
  return it == b->params.end() ? spec->default_value : it->second;
}

}  // namespace

const BlockSpec* PipelineConfig::find(std::string_view block) const {
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const BlockSpec& b) { return b.name == block; });
  return it == blocks.end() ? nullptr : &*it;
}

PipelineConfig default_config() {
  PipelineConfig c;
  for (const char* name : {"resample", "join_weather", "impute", "normalize", "window", "lstm_regressor",
                           "errors", "smooth", "find_anomaly"}) {
    c.blocks.push_back({name, {}});
  }
  return canonicalize(c);
}

std::vector<Violation> validate(const PipelineConfig& config) {
  std::vector<Violation> out;
  if (config.interval_seconds <= 0) out.push_back({"interval", "interval must be a positive number of seconds"});
  if (!(config.split > 0.0 && config.split <= 1.0)) out.push_back({"split", "split must be in (0, 1]"});
  if (config.blocks.empty()) out.push_back({"blocks", "pipeline has no blocks"});

  std::set<Facet> available{Facet::raw};
  std::set<std::string> seen;
  int learning = 0;
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const BlockSpec& b = config.blocks[i];
    const std::string where = "blocks[" + std::to_string(i) + "]";
    const BlockInfo* info = find_block(b.name);
    if (!info) {
      out.push_back({where + ".name", "unknown block \"" + b.name + "\""});
      continue;
    }
    if (!seen.insert(b.name).second) out.push_back({where + ".name", "block \"" + b.name + "\" appears twice"});
    if (info->kind == BlockKind::learning && ++learning > 1) {
      out.push_back({where + ".name", "only one learning block is allowed"});
    }
    for (const auto& [name, value] : b.params) {
      const ParamSpec* spec = info->find_param(name);
      if (!spec) {
        out.push_back({where + ".params." + name, b.name + " has no parameter \"" + name + "\""});
      } else if (auto msg = check_param(*spec, value)) {
        out.push_back({where + ".params." + name, *msg});
      }
    }
    for (Facet need : info->requires_facets) {
      if (!available.count(need)) {
        out.push_back({where + ".name", "block \"" + b.name + "\" needs " + std::string(to_string(need)) +
                                            " data, which no earlier block provides"});
      }
    }
    for (Facet f : info->provides_facets) available.insert(f);
  }
  if (!config.blocks.empty() && !available.count(Facet::events)) {
    out.push_back({"blocks", "pipeline must end with find_anomaly producing events"});
  }
  if (const BlockSpec* fa = config.find("find_anomaly")) {
    const auto k_min = numeric_param(*fa, "k_min");
    const auto k_max = numeric_param(*fa, "k_max");
    if (k_min && k_max && *k_min > *k_max) out.push_back({"find_anomaly.params.k_max", "k_max must be >= k_min"});
  }
  return out;
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  PipelineConfig c;
  try {
    if (j.contains("interval")) c.interval_seconds = j.at("interval").get<std::int64_t>();
    if (j.contains("split")) c.split = j.at("split").get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("interval/split: ") + e.what());
  }
  if (!j.contains("blocks") || !j.at("blocks").is_array()) {
    throw Error(Errc::InvalidConfig, "config needs a \"blocks\" array");
  }
  std::size_t i = 0;
  for (const json& jb : j.at("blocks")) {
    const std::string where = "blocks[" + std::to_string(i++) + "]";
    if (!jb.is_object() || !jb.contains("name") || !jb.at("name").is_string()) {
      throw Error(Errc::InvalidConfig, where + " needs a string \"name\"");
    }
    BlockSpec b;
    b.name = jb.at("name").get<std::string>();
    if (jb.contains("params")) {
      if (!jb.at("params").is_object()) throw Error(Errc::InvalidConfig, where + ".params must be an object");
      for (const auto& [key, value] : jb.at("params").items()) {
        b.params[key] = value_from_json(value, where + ".params." + key);
      }
    }
    c.blocks.push_back(std::move(b));
  }
  return c;
}

json config_to_json(const PipelineConfig& config) {
  json blocks = json::array();
  for (const BlockSpec& b : config.blocks) {
    json params = json::object();
    for (const auto& [k, v] : b.params) params[k] = value_to_json(v);
    blocks.push_back({{"name", b.name}, {"params", params}});
  }
  return {{"interval", config.interval_seconds}, {"split", config.split}, {"blocks", blocks}};
}

PipelineConfig canonicalize(const PipelineConfig& config) {
  if (auto v = validate(config); !v.empty()) {
    throw Error(Errc::InvalidConfig, v.front().field + ": " + v.front().message);
  }
  PipelineConfig out = config;
  for (BlockSpec& b : out.blocks) {
    const BlockInfo* info = find_block(b.name);
    for (const ParamSpec& spec : info->params) {
      auto it = b.params.find(spec.name);
      if (it == b.params.end()) {
        b.params[spec.name] = spec.default_value;
      } else if (spec.type == ParamType::real) {
        if (const auto* i = std::get_if<std::int64_t>(&it->second)) it->second = static_cast<double>(*i);
      }
    }
  }
  return out;
}

std::string config_hash(const PipelineConfig& config) {
  return sha256_hex(config_to_json(canonicalize(config)).dump());
}

std::int64_t param_int(const PipelineConfig& c, std::string_view block, std::string_view name) {
  const ParamValue v = lookup(c, block, name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw Error(Errc::InvalidConfig, std::string(block) + "." + std::string(name) + " is not an integer");
}

double param_real(const PipelineConfig& c, std::string_view block, std::string_view name) {
  const ParamValue v = lookup(c, block, name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Error(Errc::InvalidConfig, std::string(block) + "." + std::string(name) + " is not a number");
}

std::string param_choice(const PipelineConfig& c, std::string_view block, std::string_view name) {
  const ParamValue v = lookup(c, block, name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw Error(Errc::InvalidConfig, std::string(block) + "." + std::string(name) + " is not a string");
}

json registry_to_json() {
  json blocks = json::array();
  for (const BlockInfo& b : registry()) {
    json params = json::array();
    for (const ParamSpec& p : b.params) {
      json row = {{"name", p.name}, {"default", value_to_json(p.default_value)}, {"description", p.description}};
      switch (p.type) {
        case ParamType::integer: row["type"] = "integer"; break;
        case ParamType::real: row["type"] = "real"; break;
        case ParamType::choice: row["type"] = "choice"; break;
      }
      if (p.type == ParamType::choice) {
        row["choices"] = p.choices;
      } else {
        row["min"] = p.min;
        row["max"] = p.max;
      }
      params.push_back(std::move(row));
    }
    json req = json::array();
    json prov = json::array();
    for (Facet f : b.requires_facets) req.push_back(std::string(to_string(f)));
    for (Facet f : b.provides_facets) prov.push_back(std::string(to_string(f)));
    blocks.push_back({{"name", b.name},
                      {"kind", std::string(to_string(b.kind))},
                      {"params", params},
                      {"requires", req},
                      {"provides", prov},
                      {"description", b.description}});
  }
  return blocks;
}

json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const Violation& v : violations) out.push_back({{"field", v.field}, {"message", v.message}});
  return out;
}

}  // namespace aqad::pipeline
