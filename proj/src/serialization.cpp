#include "crowdpaste/serialization.hpp"

#include <algorithm>
#include <fstream>

#include "crowdpaste/error.hpp"

namespace crowdpaste {

using nlohmann::json;

void reject_unknown_keys(const json& j,
                         std::initializer_list<std::string_view> allowed,
                         std::string_view section) {
  if (!j.is_object()) {
    throw ConfigError(std::string(section) + " must be an object");
  }
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " +
                        std::string(section));
    }
  }
}

namespace {

template <typename T>
void read_optional(const json& j, const char* key, T& field,
                   std::string_view section) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + key + " has the wrong type");
  }
}

}  // namespace

void to_json(json& j, const PsadaParams& p) {
  j = {{"lambda", p.lambda},
       {"max_objects", p.max_objects},
       {"sigma_px", p.sigma_px},
       {"tau", p.tau},
       {"epsilon", p.epsilon},
       {"initial_temperature", p.initial_temperature},
       {"gamma", p.gamma},
       {"min_size_px", p.min_size_px},
       {"max_proposals", p.max_proposals}};
}

void from_json(const json& j, PsadaParams& p) {
  reject_unknown_keys(j,
                      {"lambda", "max_objects", "sigma_px", "tau", "epsilon",
                       "initial_temperature", "gamma", "min_size_px",
                       "max_proposals"},
                      "psada");
  read_optional(j, "lambda", p.lambda, "psada");
  read_optional(j, "max_objects", p.max_objects, "psada");
  read_optional(j, "sigma_px", p.sigma_px, "psada");
  read_optional(j, "tau", p.tau, "psada");
  read_optional(j, "epsilon", p.epsilon, "psada");
  read_optional(j, "initial_temperature", p.initial_temperature, "psada");
  read_optional(j, "gamma", p.gamma, "psada");
  read_optional(j, "min_size_px", p.min_size_px, "psada");
  read_optional(j, "max_proposals", p.max_proposals, "psada");
}

void to_json(json& j, const DengParams& p) {
  j = {{"max_groups", p.max_groups},
       {"max_objects_per_group", p.max_objects_per_group},
       {"sigma_norm", p.sigma_norm},
       {"tau", p.tau},
       {"epsilon", p.epsilon},
       {"min_size_px", p.min_size_px},
       {"max_proposals", p.max_proposals}};
}

void from_json(const json& j, DengParams& p) {
  reject_unknown_keys(j,
                      {"max_groups", "max_objects_per_group", "sigma_norm",
                       "tau", "epsilon", "min_size_px", "max_proposals"},
                      "deng");
  read_optional(j, "max_groups", p.max_groups, "deng");
  read_optional(j, "max_objects_per_group", p.max_objects_per_group, "deng");
  read_optional(j, "sigma_norm", p.sigma_norm, "deng");
  read_optional(j, "tau", p.tau, "deng");
  read_optional(j, "epsilon", p.epsilon, "deng");
  read_optional(j, "min_size_px", p.min_size_px, "deng");
  read_optional(j, "max_proposals", p.max_proposals, "deng");
}

void to_json(json& j, const ColorJitter& c) {
  j = {{"hue_shift_deg", c.hue_shift_deg},
       {"saturation_scale", c.saturation_scale},
       {"apply_probability", c.apply_probability}};
}

void from_json(const json& j, ColorJitter& c) {
  reject_unknown_keys(j, {"hue_shift_deg", "saturation_scale",
                          "apply_probability"},
                      "jitter");
  read_optional(j, "hue_shift_deg", c.hue_shift_deg, "jitter");
  read_optional(j, "saturation_scale", c.saturation_scale, "jitter");
  read_optional(j, "apply_probability", c.apply_probability, "jitter");
}

json plan_to_json(const PastePlan& plan) {
  json groups = json::array();
  for (const PlacementGroup& g : plan.groups) {
    json objects = json::array();
    for (const PlacedObject& o : g.objects) {
      objects.push_back({{"sprite_ref", o.sprite_ref},
                         {"x", o.x},
                         {"y", o.y},
                         {"size", o.size},
                         {"group_index", o.group_index},
                         {"paste_order", o.paste_order},
                         {"temperature", o.temperature},
                         {"accepted_by", acceptance_name(o.accepted_by)},
                         {"proposals", o.proposals}});
    }
    groups.push_back({{"center",
                       {{"x", g.center.x},
                        {"y", g.center.y},
                        {"size", g.center.size},
                        {"footprint_w", g.center.footprint_w},
                        {"footprint_h", g.center.footprint_h}}},
                      {"objects", std::move(objects)}});
  }
  json params;
  std::visit([&params](const auto& p) { params = p; }, plan.params);
  return {{"image_id", plan.image_id},
          {"source_id", plan.source_id},
          {"image_w", plan.image_w},
          {"image_h", plan.image_h},
          {"engine", engine_name(plan.engine())},
          {"params", std::move(params)},
          {"seed",
           {{"master_seed", plan.seed.master_seed},
            {"stream_index", plan.seed.stream_index}}},
          {"groups", std::move(groups)}};
}

PastePlan plan_from_json(const json& j) {
  PastePlan plan;
  try {
    plan.image_id = j.at("image_id").get<std::string>();
    plan.source_id = j.at("source_id").get<std::string>();
    plan.image_w = j.at("image_w").get<int>();
    plan.image_h = j.at("image_h").get<int>();
    if (parse_engine(j.at("engine").get<std::string>()) == Engine::kPsada) {
      plan.params = j.at("params").get<PsadaParams>();
    } else {
      plan.params = j.at("params").get<DengParams>();
    }
    plan.seed.master_seed = j.at("seed").at("master_seed").get<std::uint64_t>();
    plan.seed.stream_index =
        j.at("seed").at("stream_index").get<std::uint64_t>();
    for (const json& jg : j.at("groups")) {
      PlacementGroup g;
      const json& c = jg.at("center");
      g.center = {c.at("x").get<int>(), c.at("y").get<int>(),
                  c.at("size").get<int>(), c.at("footprint_w").get<int>(),
                  c.at("footprint_h").get<int>()};
      for (const json& jo : jg.at("objects")) {
        PlacedObject o;
        o.sprite_ref = jo.at("sprite_ref").get<int>();
        o.x = jo.at("x").get<int>();
        o.y = jo.at("y").get<int>();
        o.size = jo.at("size").get<int>();
        o.group_index = jo.at("group_index").get<int>();
        o.paste_order = jo.at("paste_order").get<int>();
        o.temperature = jo.at("temperature").get<double>();
        o.accepted_by =
            parse_acceptance(jo.at("accepted_by").get<std::string>());
        o.proposals = jo.at("proposals").get<int>();
        g.objects.push_back(o);
      }
      plan.groups.push_back(std::move(g));
    }
  } catch (const json::exception& err) {
    throw DataError(std::string("malformed plan: ") + err.what());
  } catch (const ConfigError& err) {
    throw DataError(std::string("malformed plan: ") + err.what());
  }
  return plan;
}

void save_plan(const PastePlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << plan_to_json(plan).dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

PastePlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read plan " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& err) {
    throw DataError("malformed plan " + path.string() + ": " + err.what());
  }
  return plan_from_json(j);
}

}  // namespace crowdpaste
