#include "drrules/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace drrules {

namespace {

using nlohmann::json;

json config_to_json(const TrainConfig& c) {
  json j;
  j["cprime"] = c.cprime;
  j["cmax"] = c.cmax;
  j["rho"] = c.rho;
  j["divergence"] = c.divergence;
  j["delta"] = c.delta;
  j["patience"] = c.patience;
  j["improve_thresh"] = c.improve_thresh;
  j["ensemble_ip_time_s"] = c.ensemble_ip_time_s;
  j["ensemble_ip_node_budget"] = c.ensemble_ip_node_budget;
  j["weights_for_ip"] = c.weights_for_ip;
  j["seed"] = std::to_string(c.seed);
  j["max_outer_iters"] = c.max_outer_iters;
  j["colgen"] = {
      {"max_literals", c.colgen.max_literals},
      {"max_rounds", c.colgen.max_rounds},
      {"columns_per_round", c.colgen.columns_per_round},
      {"pricing_time_s", c.colgen.pricing_time_s},
      {"pricing_node_budget", c.colgen.pricing_node_budget},
      {"total_time_s", c.colgen.total_time_s},
      {"ip_floor_s", c.colgen.ip_floor_s},
      {"ip_node_budget", c.colgen.ip_node_budget},
  };
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.cprime = j.at("cprime").get<int>();
  c.cmax = j.at("cmax").get<int>();
  c.rho = j.at("rho").get<double>();
  c.divergence = j.at("divergence").get<std::string>();
  c.delta = j.at("delta").get<double>();
  c.patience = j.at("patience").get<int>();
  c.improve_thresh = j.at("improve_thresh").get<double>();
  c.ensemble_ip_time_s = j.at("ensemble_ip_time_s").get<double>();
  c.ensemble_ip_node_budget = j.at("ensemble_ip_node_budget").get<long>();
  c.weights_for_ip = j.at("weights_for_ip").get<std::string>();
  c.seed = std::stoull(j.at("seed").get<std::string>());
  c.max_outer_iters = j.at("max_outer_iters").get<int>();
  const json& g = j.at("colgen");
  c.colgen.cprime = c.cprime;
  c.colgen.max_literals = g.at("max_literals").get<int>();
  c.colgen.max_rounds = g.at("max_rounds").get<int>();
  c.colgen.columns_per_round = g.at("columns_per_round").get<int>();
  c.colgen.pricing_time_s = g.at("pricing_time_s").get<double>();
  c.colgen.pricing_node_budget = g.at("pricing_node_budget").get<long>();
  c.colgen.total_time_s = g.at("total_time_s").get<double>();
  c.colgen.ip_floor_s = g.at("ip_floor_s").get<double>();
  c.colgen.ip_node_budget = g.at("ip_node_budget").get<long>();
  return c;
}

std::string hex_u64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex_u64(const std::string& s) { return std::stoull(s, nullptr, 16); }

json ensemble_to_json(const Ensemble& e) {
  json members = json::array();
  for (const auto& m : e.members()) {
    json rules = json::array();
    for (const auto& conj : m.h.rules()) {
      json lits = json::array();
      for (const auto& lit : conj.literals()) {
        lits.push_back({{"feature", lit.feature}, {"value", static_cast<int>(lit.value)}});
      }
      rules.push_back(std::move(lits));
    }
    members.push_back({{"weight", m.weight}, {"rules", std::move(rules)}});
  }
  return members;
}

Ensemble ensemble_from_json(const json& members_json) {
  std::vector<Ensemble::Member> members;
  for (const auto& mj : members_json) {
    std::vector<Conjunction> rules;
    for (const auto& rj : mj.at("rules")) {
      std::vector<Literal> lits;
      for (const auto& lj : rj) {
        lits.push_back(Literal{lj.at("feature").get<int>(),
                               static_cast<std::uint8_t>(lj.at("value").get<int>())});
      }
      rules.push_back(Conjunction::make(std::move(lits)));
    }
    members.push_back({RuleSet::make(std::move(rules)), mj.at("weight").get<double>()});
  }
  return Ensemble::make(std::move(members));
}

}  // namespace

std::string model_to_json_string(const TrainedModel& model) {
  json j;
  j["format"] = "drrules-model";
  j["version"] = 1;
  if (model.constant.has_value()) {
    j["constant"] = *model.constant;
  } else {
    j["constant"] = nullptr;
  }
  j["config"] = config_to_json(model.config);
  j["data"] = {{"fingerprint", hex_u64(model.dataset_fingerprint)},
               {"n", model.n_train},
               {"d", model.n_features}};
  j["features"] = model.feature_names;
  j["ensemble"] = ensemble_to_json(model.ensemble);
  j["training"] = {{"objective", model.train_objective},
                   {"chosen_c", model.chosen_c},
                   {"chosen_iter", model.chosen_iter}};
  json hist = json::array();
  for (const auto& r : model.history) {
    hist.push_back({{"iter", r.iter},
                    {"rmlp_objective", r.rmlp_objective},
                    {"member_ip_objective", r.member_ip_objective},
                    {"member_rules", r.member_rules},
                    {"robust_loss", r.robust_loss},
                    {"empirical_loss", r.empirical_loss},
                    {"inner_best_objective", r.inner_best_objective},
                    {"inner_best_c", r.inner_best_c},
                    {"improved", r.improved}});
  }
  j["history"] = std::move(hist);
  return j.dump(2) + "\n";
}

TrainedModel model_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model parse error: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "drrules-model") {
      throw std::runtime_error("not a model file");
    }
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported model version");
    TrainedModel model;
    if (!j.at("constant").is_null()) model.constant = j.at("constant").get<int>();
    model.config = config_from_json(j.at("config"));
    model.dataset_fingerprint = parse_hex_u64(j.at("data").at("fingerprint").get<std::string>());
    model.n_train = j.at("data").at("n").get<std::size_t>();
    model.n_features = j.at("data").at("d").get<std::size_t>();
    model.feature_names = j.at("features").get<std::vector<std::string>>();
    model.ensemble = ensemble_from_json(j.at("ensemble"));
    model.train_objective = j.at("training").at("objective").get<double>();
    model.chosen_c = j.at("training").at("chosen_c").get<int>();
    model.chosen_iter = j.at("training").at("chosen_iter").get<int>();
    for (const auto& rj : j.at("history")) {
      OuterRecord r;
      r.iter = rj.at("iter").get<int>();
      r.rmlp_objective = rj.at("rmlp_objective").get<double>();
      r.member_ip_objective = rj.at("member_ip_objective").get<double>();
      r.member_rules = rj.at("member_rules").get<int>();
      r.robust_loss = rj.at("robust_loss").get<double>();
      r.empirical_loss = rj.at("empirical_loss").get<double>();
      r.inner_best_objective = rj.at("inner_best_objective").get<double>();
      r.inner_best_c = rj.at("inner_best_c").get<int>();
      r.improved = rj.at("improved").get<bool>();
      model.history.push_back(r);
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model parse error: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json_string(model);
  if (!out.flush()) throw std::runtime_error("failed writing model file: " + path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json_string(buf.str());
}

std::string model_to_text(const TrainedModel& model) {
  std::ostringstream out;
  const auto name_of = [&](const Literal& lit) -> std::string {
    const auto ju = static_cast<std::size_t>(lit.feature);
    if (ju < model.feature_names.size()) {
      const std::string& n = model.feature_names[ju];
      return lit.value ? n : "!(" + n + ")";
    }
    return "f" + std::to_string(lit.feature) + "=" + std::to_string(static_cast<int>(lit.value));
  };
  out << "# rule ensemble: predict 1 when the weighted vote reaches 1/2\n";
  if (model.constant.has_value()) {
    out << "# degenerate training labels: constant prediction " << *model.constant << "\n";
    return out.str();
  }
  int idx = 0;
  for (const auto& m : model.ensemble.members()) {
    ++idx;
    char w[32];
    std::snprintf(w, sizeof w, "%g", m.weight);
    out << "# member " << idx << ": " << m.h.rules().size() << " rules, complexity "
        << m.h.complexity() << "\n";
    if (m.h.rules().empty()) {
      out << "w=" << w << " : (no rules: always 0)\n";
      continue;
    }
    for (const auto& conj : m.h.rules()) {
      out << "w=" << w << " : (";
      bool first = true;
      for (const auto& lit : conj.literals()) {
        if (!first) out << " AND ";
        out << name_of(lit);
        first = false;
      }
      out << ")\n";
    }
  }
  return out.str();
}

void save_history_csv(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write history file: " + path);
  out << "iter,rmlp_objective,member_ip_objective,member_rules,robust_loss,empirical_loss,"
         "inner_best_objective,inner_best_c,improved\n";
  char line[256];
  for (const auto& r : model.history) {
    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%d,%.12g,%.12g,%.12g,%d,%d\n", r.iter,
                  r.rmlp_objective, r.member_ip_objective, r.member_rules, r.robust_loss,
                  r.empirical_loss, r.inner_best_objective, r.inner_best_c, r.improved ? 1 : 0);
    out << line;
  }
  if (!out.flush()) throw std::runtime_error("failed writing history file: " + path);
}

}  // namespace drrules
