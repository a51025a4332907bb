#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mgp/datasets.hpp"
#include "mgp/geodesic.hpp"
#include "mgp/predictor.hpp"
#include "mgp/vae.hpp"

namespace mgp {

// Run configuration: one JSON document with optional sections mirroring the
// dataset spec, model, geodesic and predictor configs. Every field has a
// default (hyperparameters follow the reference settings: two fBM channels
// H = 0.1 / 0.9, sigma 0.25, beta 2, lr 0.001, 200 epochs). Parsing is
// strict: unknown keys are rejected.
struct RunConfig {
  data::ToyVideoSpec dataset;
  std::string dataset_path;  // when set, load this MGPD file instead of generating
  ModelConfig model;
  geo::GeodesicConfig geodesic;
  PredictorConfig predictor;
};

RunConfig default_run_config();

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json geodesic_config_to_json(const geo::GeodesicConfig& cfg);
geo::GeodesicConfig geodesic_config_from_json(const nlohmann::json& j);

nlohmann::json dataset_spec_to_json(const data::ToyVideoSpec& spec);
data::ToyVideoSpec dataset_spec_from_json(const nlohmann::json& j);

}  // namespace mgp
