#include <gtest/gtest.h>

#include <sstream>

#include "aqad/core/error.hpp"
#include "aqad/pipeline/config.hpp"
#include "aqad/pipeline/runner.hpp"
#include "aqad/service/ingest.hpp"
#include "aqad/service/synth.hpp"

using namespace aqad;
using namespace aqad::pipeline;
using nlohmann::json;

namespace {

bool mentions(const std::vector<Violation>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field.find(field) != std::string::npos; });
}

BlockSpec* block(PipelineConfig& c, const std::string& name) {
  for (auto& b : c.blocks)
    if (b.name == name) return &b;
  return nullptr;
}

// Small and quick: short training, short windows.
PipelineConfig fast_config() {
  auto c = default_config();
  block(c, "lstm_regressor")->params = {{"hidden_dim", std::int64_t{6}}, {"epochs", std::int64_t{3}}};
  block(c, "find_anomaly")->params["h"] = std::int64_t{96};
  return c;
}

Dataset synth_dataset(std::int64_t days, int anomalies, std::uint64_t seed, bool with_weather = true) {
  service::SynthSpec spec;
  spec.days = days;
  spec.random_anomalies = anomalies;
  spec.seed = seed;
  auto out = service::synth_generate(spec);
  std::string readings = out.readings_csv;
  if (!with_weather) {
    std::string kept;
    std::istringstream in(readings);
    for (std::string line; std::getline(in, line);)
      if (line.find(",humidity,") == std::string::npos) kept += line + "\n";
    readings = kept;
  }
  return service::parse_dataset(readings, out.stations_csv);
}

}  // namespace

TEST(Config, DefaultIsValid) {
  EXPECT_TRUE(validate(default_config()).empty());
  const auto c = default_config();
  ASSERT_EQ(c.blocks.size(), 9u);
  EXPECT_EQ(c.blocks.front().name, "resample");
  EXPECT_EQ(c.blocks.back().name, "find_anomaly");
}

TEST(Config, RangeViolationNamesTheField) {
  auto c = default_config();
  block(c, "window")->params["l_s"] = std::int64_t{0};
  const auto v = validate(c);
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(mentions(v, "params.l_s"));
}

TEST(Config, OrderingViolation) {
  auto c = default_config();
  // Move the regressor ahead of the window block.
  std::swap(c.blocks[4], c.blocks[5]);
  EXPECT_EQ(c.blocks[4].name, "lstm_regressor");
  const auto v = validate(c);
  EXPECT_TRUE(mentions(v, "blocks[4]"));
}

TEST(Config, OtherViolations) {
  auto c = default_config();
  c.blocks.push_back({"bogus", {}});
  EXPECT_TRUE(mentions(validate(c), ".name"));
  c = default_config();
  block(c, "lstm_regressor")->params["wings"] = std::int64_t{2};
  EXPECT_TRUE(mentions(validate(c), "params.wings"));
  c = default_config();
  block(c, "lstm_regressor")->params["optimizer"] = std::string("rmsprop");
  EXPECT_TRUE(mentions(validate(c), "params.optimizer"));
  c = default_config();
  c.blocks.insert(c.blocks.begin() + 6, {"persistence_regressor", {}});
  EXPECT_FALSE(validate(c).empty());
  c = default_config();
  c.split = 0;
  EXPECT_TRUE(mentions(validate(c), "split"));
  c = default_config();
  c.blocks.pop_back();
  EXPECT_FALSE(validate(c).empty());
  c = default_config();
  block(c, "find_anomaly")->params["k_min"] = 5.0;
  block(c, "find_anomaly")->params["k_max"] = 2.0;
  EXPECT_TRUE(mentions(validate(c), "k_max"));
}

TEST(Config, PersistenceIsADropInRegressor) {
  auto c = default_config();
  *block(c, "lstm_regressor") = {"persistence_regressor", {}};
  EXPECT_TRUE(validate(c).empty());
}

TEST(Config, JsonRoundTripAndHash) {
  const auto c = fast_config();
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(c));

  // Key order does not matter.
  const auto reordered = json::parse(R"({"split": 0.5, "blocks": [], "interval": 3600})");
  auto r = j;
  r["blocks"] = j["blocks"];
  auto alt = reordered;
  alt["blocks"] = j["blocks"];
  EXPECT_EQ(config_hash(config_from_json(alt)), config_hash(config_from_json(r)));

  // Spelling out a default does not matter.
  auto spelled = c;
  block(spelled, "smooth")->params["w_ma"] = std::int64_t{2};
  block(spelled, "resample")->params["agg"] = std::string("mean");
  EXPECT_EQ(config_hash(spelled), config_hash(c));

  // Any real change does.
  auto changed = c;
  block(changed, "smooth")->params["w_ma"] = std::int64_t{3};
  EXPECT_NE(config_hash(changed), config_hash(c));
  changed = c;
  changed.split = 0.6;
  EXPECT_NE(config_hash(changed), config_hash(c));
  changed = c;
  block(changed, "find_anomaly")->params["calm_level"] = 0.25;
  EXPECT_NE(config_hash(changed), config_hash(c));
}

TEST(Config, Canonicalize) {
  const auto c = canonicalize(fast_config());
  EXPECT_EQ(param_int(c, "window", "l_s"), 24);
  EXPECT_EQ(param_int(c, "lstm_regressor", "epochs"), 3);
  EXPECT_EQ(param_real(c, "find_anomaly", "k_max"), 12.0);
  EXPECT_EQ(param_choice(c, "lstm_regressor", "optimizer"), "adam");
  EXPECT_EQ(block(const_cast<PipelineConfig&>(c), "find_anomaly")->params.size(), 7u);
}

TEST(Config, StructuralErrors) {
  EXPECT_THROW(config_from_json(json::array()), Error);
  EXPECT_THROW(config_from_json(json{{"blocks", "nope"}}), Error);
}

TEST(Registry, Shape) {
  const auto& r = registry();
  EXPECT_EQ(r.size(), 10u);
  ASSERT_TRUE(find_block("lstm_regressor"));
  EXPECT_EQ(find_block("lstm_regressor")->kind, BlockKind::learning);
  EXPECT_EQ(find_block("persistence_regressor")->kind, BlockKind::learning);
  EXPECT_EQ(find_block("impute")->kind, BlockKind::transform);
  EXPECT_FALSE(find_block("nope"));
  const auto j = registry_to_json();
  EXPECT_EQ(j.size(), 10u);
}

TEST(Runner, OneModelOnSyntheticData) {
  const auto ds = synth_dataset(30, 2, 5);
  const auto r = run(fast_config(), ds, {{"SYN01"}, {Attribute::PM25}}, 7);
  ASSERT_EQ(r.models.size(), 1u);
  const auto& m = r.models[0];
  EXPECT_EQ(m.state, ModelState::done) << m.error;
  ASSERT_TRUE(m.mape);
  EXPECT_GT(*m.mape, 0.0);
  EXPECT_EQ(m.loss_history.size(), 3u);
  EXPECT_FALSE(m.checkpoint.empty());
  EXPECT_EQ(m.predictions.size(), 30 * 24 - 24);
  EXPECT_EQ(m.errors.e_s.size(), m.predictions.size());
  EXPECT_EQ(r.summary.model_count, 1);
  EXPECT_EQ(r.summary.event_count, static_cast<std::int64_t>(m.events.size()));
  EXPECT_EQ(r.dataset_id, ds.id);
  for (const auto& ev : m.events) {
    EXPECT_EQ(ev.experiment_id, r.experiment_id);
    EXPECT_EQ(ev.id.rfind(r.experiment_id + ":SYN01:PM25:", 0), 0u);
  }
}

TEST(Runner, DeterministicAndThreadIndependent) {
  const auto ds = synth_dataset(20, 1, 2);
  const auto a = run(fast_config(), ds, {}, 11);
  RunOptions opts;
  opts.threads = 3;
  const auto b = run(fast_config(), ds, {}, 11, opts);
  EXPECT_EQ(result_to_json(a).dump(), result_to_json(b).dump());
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
  const auto c = run(fast_config(), ds, {}, 12);
  EXPECT_NE(c.experiment_id, a.experiment_id);
  EXPECT_NE(result_to_json(c)["models"][0]["loss_history"], result_to_json(a)["models"][0]["loss_history"]);
}

TEST(Runner, PersistenceSubstitution) {
  const auto ds = synth_dataset(20, 2, 3);
  auto c = default_config();
  *block(c, "lstm_regressor") = {"persistence_regressor", {}};
  const auto r = run(c, ds, {}, 1);
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.models[0].state, ModelState::done) << r.models[0].error;
  EXPECT_TRUE(r.models[0].checkpoint.empty());
  EXPECT_TRUE(r.models[0].mape);
}

TEST(Runner, FailedModelDoesNotAbortOthers) {
  auto ds = synth_dataset(20, 0, 4);
  // A second station without humidity cannot be imputed.
  const auto broken = synth_dataset(20, 0, 4, false);
  Station s2 = ds.stations[0];
  s2.id = "BROKEN";
  ds.stations.push_back(s2);
  for (const auto& [key, series] : broken.readings) {
    RawSeries copy("BROKEN", key.second, series.points());
    ds.readings[{"BROKEN", key.second}] = copy;
  }
  const auto r = run(fast_config(), ds, {}, 1);
  ASSERT_EQ(r.models.size(), 2u);
  EXPECT_EQ(r.models[0].state, ModelState::done);
  EXPECT_EQ(r.models[1].state, ModelState::failed);
  EXPECT_NE(r.models[1].error.find("UnimputableColumn"), std::string::npos);
  EXPECT_EQ(r.summary.failed_count, 1);
  EXPECT_EQ(r.summary.model_count, 2);
}

TEST(Runner, SelectionErrors) {
  const auto ds = synth_dataset(10, 0, 1);
  try {
    plan_models(ds, {{"NOPE"}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownStation);
  }
  auto bad = default_config();
  block(bad, "window")->params["l_s"] = std::int64_t{0};
  try {
    run(bad, ds, {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
  }
  // A pollutant the station never measured becomes a failed model.
  const auto r = run(fast_config(), ds, {{}, {Attribute::SO2}}, 1);
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.models[0].state, ModelState::failed);
}

TEST(Runner, ExperimentIdIsContentAddressed) {
  const std::string h = config_hash(default_config());
  EXPECT_EQ(experiment_id(h, "ds-1", 7, {}), experiment_id(h, "ds-1", 7, {}));
  EXPECT_NE(experiment_id(h, "ds-1", 7, {}), experiment_id(h, "ds-1", 8, {}));
  EXPECT_NE(experiment_id(h, "ds-1", 7, {}), experiment_id(h, "ds-2", 7, {}));
  EXPECT_NE(experiment_id(h, "ds-1", 7, {{"A"}, {}}), experiment_id(h, "ds-1", 7, {}));
  EXPECT_EQ(experiment_id(h, "ds-1", 7, {}).rfind("exp-", 0), 0u);
}

TEST(Runner, ResultJsonRoundTrip) {
  const auto ds = synth_dataset(20, 2, 6);
  const auto r = run(fast_config(), ds, {}, 3);
  const auto j = result_to_json(r);
  const auto back = result_from_json(json::parse(j.dump()));
  EXPECT_EQ(result_to_json(back).dump(), j.dump());
  EXPECT_EQ(all_events(back).size(), static_cast<std::size_t>(r.summary.event_count));
  const auto rep = report_to_json(r);
  EXPECT_TRUE(rep.contains("summary"));
  EXPECT_FALSE(rep.dump().find("\"y_hat\"") != std::string::npos);
}

TEST(Runner, CancelledBeforeStart) {
  const auto ds = synth_dataset(10, 0, 1);
  std::stop_source stop;
  stop.request_stop();
  RunOptions opts;
  opts.stop = stop.get_token();
  const auto r = run(fast_config(), ds, {}, 1, opts);
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.models[0].state, ModelState::cancelled);
}
