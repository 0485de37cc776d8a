#include "json_config.hpp"

#include <sstream>

#include "json.hpp"

namespace poseprompt::cli {

using nlohmann::json;

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

json typed(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(s, &pos);
    if (pos == s.size()) return i;
    const double d = std::stod(s, &pos);
    if (pos == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

void add_items(const json& obj, const std::vector<std::string>& parents,
               std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : obj.items()) {
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar_text(v));
    } else if (value.is_null()) {
      continue;
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    out.push_back(std::move(item));
  }
}

}  // namespace

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json root;
  try {
    root = json::parse(input);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw CLI::ConversionError("config must be a JSON object");

  std::vector<std::string> active;
  for (const auto* sub : root_->get_subcommands()) active.push_back(sub->get_name());

  std::vector<CLI::ConfigItem> items;
  json flat = json::object();
  for (const auto& [key, value] : root.items()) {
    bool is_sub = false;
    for (const auto* sub : root_->get_subcommands({})) is_sub = is_sub || sub->get_name() == key;
    if (is_sub && value.is_object()) {
      if (std::find(active.begin(), active.end(), key) != active.end()) add_items(value, {key}, items);
    } else if (key != "command") {
      flat[key] = value;
    }
  }
  add_items(flat, active.empty() ? std::vector<std::string>{} : std::vector<std::string>{active.front()}, items);
  return items;
}

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || !opt->get_configurable()) continue;
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      if (!default_also || opt->get_default_str().empty()) continue;
      values = {opt->get_default_str()};
      if (opt->get_expected_max() > 1 && values[0].size() > 1 && values[0].front() == '[') {
        std::string body = values[0].substr(1, values[0].size() - 2);
        values.clear();
        std::stringstream ss(body);
        for (std::string part; std::getline(ss, part, ',');) values.push_back(part);
      }
    }
    if (opt->get_type_size() == 0 && values.size() == 1) {
      // Flags store their count or "true".
      j[name] = values[0] == "true" || (values[0] != "false" && values[0] != "0");
    } else if (opt->get_expected_max() > 1) {
      json arr = json::array();
      for (const auto& v : values) arr.push_back(typed(v));
      j[name] = arr;
    } else {
      j[name] = typed(values.back());
    }
  }
  json root;
  root["command"] = app->get_name();
  root[app->get_name()] = j;
  return root.dump(2) + "\n";
}

}  // namespace poseprompt::cli
