#pragma once
// Named dataset configurations for the benchmark CSVs the CLI understands
// out of the box. Each preset bundles a Schema (column kinds, label rule)
// with the sentinel-handling policy the source data needs.

#include <string>
#include <vector>

#include "drrules/dataset.hpp"

namespace drrules {

struct Preset {
  std::string name;
  Schema schema;
  SpecialValuePolicy policy;
  std::string notes;  // one-line provenance / preprocessing summary
};

// Look up a preset by name ("heart", "transfusion", "fico", "liver",
// "synth"). Throws std::runtime_error listing the known names on a miss.
const Preset& preset_by_name(const std::string& name);

// All registered presets, in a stable order.
const std::vector<Preset>& all_presets();

}  // namespace drrules
