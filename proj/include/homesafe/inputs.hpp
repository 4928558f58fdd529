#pragma once

#include <string>
#include <vector>

#include "homesafe/appdsl.hpp"
#include "homesafe/catalog.hpp"
#include "homesafe/config.hpp"

namespace homesafe {

// Whole file contents. Throws ConfigError when unreadable.
std::string read_file(const std::string& path);

// App files and directories (every *.app inside, sorted by name), in order.
std::vector<std::string> expand_app_paths(const std::vector<std::string>& paths);
std::vector<AppSpec> load_library(const std::vector<std::string>& files, const Catalog& catalog);

SystemConfig load_config_file(const std::string& path, const std::vector<AppSpec>& library,
                              const Catalog& catalog);

} // namespace homesafe
