#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "homesafe/catalog.hpp"
#include "homesafe/config.hpp"
#include "homesafe/inputs.hpp"

namespace fixtures {

inline std::string path(const std::string& rel) { return std::string(HOMESAFE_FIXTURE_DIR) + "/" + rel; }

inline const std::vector<homesafe::AppSpec>& library() {
    static const std::vector<homesafe::AppSpec> apps = homesafe::load_library(
        homesafe::expand_app_paths({path("apps")}), homesafe::Catalog::standard());
    return apps;
}

// fixtures/configs/<name>.cfg against the whole fixture app library.
inline homesafe::SystemConfig config(const std::string& name) {
    return homesafe::load_config_file(path("configs/" + name + ".cfg"), library(), homesafe::Catalog::standard());
}

inline homesafe::SystemConfig config_text(const std::string& text) {
    return homesafe::load_config(text, library(), homesafe::Catalog::standard(), "<test>");
}

inline const homesafe::AppSpec& app(const std::string& name) {
    for (const auto& a : library())
        if (a.name == name) return a;
    throw std::runtime_error("no fixture app " + name);
}

inline std::vector<std::string> instance_ids(const homesafe::SystemConfig& c) {
    std::vector<std::string> out;
    for (const auto& a : c.apps) out.push_back(a.id);
    return out;
}

inline const std::vector<std::string>& config_names() {
    static const std::vector<std::string> names{"alice",     "dark",     "fivehome",  "goodgroup", "inventory",
                                                "makeitso", "path",     "mixed",    "thermostat"};
    return names;
}

} // namespace fixtures
