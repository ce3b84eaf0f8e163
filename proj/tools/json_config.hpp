#pragma once

// JSON reader for CLI11's --config: keys mirror flag names. A top-level object
// named after a subcommand addresses that subcommand; other top-level keys go
// to the subcommand selected on the command line.

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace hoqmc::cli {

class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root = nullptr) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::ordered_json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        auto res = opt->results();
        if (opt->get_type_size() == 0) {
          j[name] = true;
        } else if (res.size() == 1) {
          j[name] = res.front();
        } else {
          j[name] = res;
        }
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");

    std::vector<std::string> selected;
    if (root_ && !root_->get_subcommands().empty()) selected.push_back(root_->get_subcommands().front()->get_name());

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object() && root_ && root_->get_subcommand_no_throw(key)) {
        collect(value, {key}, items);
      } else {
        add(key, value, selected, items);
      }
    }
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void add(const std::string& key, const nlohmann::json& value, const std::vector<std::string>& parents,
                  std::vector<CLI::ConfigItem>& items) {
    if (value.is_object()) {
      auto next = parents;
      next.push_back(key);
      collect(value, next, items);
      return;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const auto& e : value) item.inputs.push_back(scalar(e));
    } else {
      item.inputs.push_back(scalar(value));
    }
    items.push_back(std::move(item));
  }

  static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) add(key, value, parents, items);
  }
};

}  // namespace hoqmc::cli
