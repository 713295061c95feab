#include "drrules/presets.hpp"

#include <stdexcept>

namespace drrules {
namespace {

Preset make_heart() {
  // UCI Heart Disease, Cleveland subset (processed.cleveland.data). The file
  // is headerless; 'num' counts diseased vessels and is recoded to num > 0.
  // Rows with an unknown vessel count ('ca' = "?") are dropped; an unknown
  // thalassemia code stays in as its own category.
  Preset p;
  p.name = "heart";
  p.schema.column_names = {"age",     "sex",   "cp",    "trestbps", "chol",
                           "fbs",     "restecg", "thalach", "exang", "oldpeak",
                           "slope",   "ca",    "thal",  "num"};
  p.schema.label_column = "num";
  p.schema.label_positive_threshold = 0.0;
  for (const char* c : {"cp", "restecg", "slope", "thal", "ca"})
    p.schema.kinds[c] = ColumnKind::Categorical;
  for (const char* c : {"sex", "fbs", "exang"})
    p.schema.kinds[c] = ColumnKind::Binary;
  p.policy.rules.push_back({"?", SpecialValuePolicy::Action::DropRowIfMatch, "", {"ca"}});
  p.notes = "Cleveland heart disease; label num>0; rows with ca='?' dropped";
  return p;
}

Preset make_transfusion() {
  // UCI Blood Transfusion Service Center. Plain numeric table with a header;
  // the label column name is the full questionnaire phrasing.
  Preset p;
  p.name = "transfusion";
  p.schema.label_column = "whether he/she donated blood in March 2007";
  p.schema.label_map = {{"0", "0"}, {"1", "1"}};
  p.notes = "blood transfusion donations; numeric features only";
  return p;
}

Preset make_fico() {
  // FICO HELOC challenge data. Negative codes are meta-values: -9 marks a
  // record with no usable bureau data (row dropped when every cell is -9),
  // -7 means "condition never observed" (recoded past the observed maximum),
  // and leftover -9/-8 cells are genuinely missing. Delinquency codes above 7
  // in MaxDelq2PublicRecLast12M collapse to 7 (current / never delinquent).
  Preset p;
  p.name = "fico";
  p.schema.label_column = "RiskPerformance";
  p.schema.label_map = {{"Bad", "1"}, {"Good", "0"}};
  p.schema.kinds["MaxDelq2PublicRecLast12M"] = ColumnKind::Categorical;
  p.schema.kinds["MaxDelqEver"] = ColumnKind::Categorical;
  p.schema.value_remap["MaxDelq2PublicRecLast12M"] = {{"8", "7"}, {"9", "7"}};
  p.policy.rules.push_back({"-9", SpecialValuePolicy::Action::DropRowIfAll, "", {}});
  p.policy.rules.push_back({"-7", SpecialValuePolicy::Action::ReplaceWithMaxPlus1, "", {}});
  p.policy.rules.push_back({"-8", SpecialValuePolicy::Action::NullCategory, "", {}});
  p.policy.rules.push_back({"-9", SpecialValuePolicy::Action::NullCategory, "", {}});
  p.notes = "FICO HELOC; label Bad=1; -9/-7/-8 special codes handled";
  return p;
}

Preset make_liver() {
  // UCI Liver Disorders (BUPA). Headerless. The conventional 'selector'
  // column is a train/test split marker, not ground truth, so the target is
  // daily drinks > 2 and 'selector' is discarded.
  Preset p;
  p.name = "liver";
  p.schema.column_names = {"mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks", "selector"};
  p.schema.label_column = "drinks";
  p.schema.label_positive_threshold = 2.0;
  p.schema.drop_columns = {"selector"};
  p.notes = "BUPA liver disorders; label drinks>2; selector column dropped";
  return p;
}

Preset make_synth() {
  // Companion schema for the bundled synthetic generator (see synth.hpp).
  Preset p;
  p.name = "synth";
  p.schema.label_column = "y";
  p.schema.kinds["cat"] = ColumnKind::Categorical;
  p.schema.kinds["flag"] = ColumnKind::Binary;
  p.notes = "built-in synthetic planted-rule task";
  return p;
}

}  // namespace

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets = {make_heart(), make_transfusion(), make_fico(),
                                              make_liver(), make_synth()};
  return presets;
}

const Preset& preset_by_name(const std::string& name) {
  for (const Preset& p : all_presets())
    if (p.name == name) return p;
  std::string known;
  for (const Preset& p : all_presets()) {
    if (!known.empty()) known += ", ";
    known += p.name;
  }
  throw std::runtime_error("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace drrules
