#pragma once

#include <string>

#include "drrules/ensemble.hpp"

namespace drrules {

// Machine-readable round-trippable serialization of a trained model.
std::string model_to_json_string(const TrainedModel& model);
TrainedModel model_from_json_string(const std::string& text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

// Human-readable listing: one rule per line, `w=0.25 : (f12=1 AND f40=0)`,
// with source feature names substituted when available.
std::string model_to_text(const TrainedModel& model);

// Per-outer-iteration training history as CSV.
void save_history_csv(const TrainedModel& model, const std::string& path);

}  // namespace drrules
