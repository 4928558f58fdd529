#include "homesafe/inputs.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homesafe/error.hpp"

namespace homesafe {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> expand_app_paths(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        std::error_code ec;
        if (!fs::is_directory(p, ec)) {
            out.push_back(p);
            continue;
        }
        std::vector<std::string> found;
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".app") found.push_back(entry.path().string());
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

std::vector<AppSpec> load_library(const std::vector<std::string>& files, const Catalog& catalog) {
    std::vector<AppSpec> apps;
    for (const auto& f : files)
        for (auto& a : parse_apps(read_file(f), catalog, f)) {
            if (std::any_of(apps.begin(), apps.end(), [&](const AppSpec& b) { return b.name == a.name; }))
                throw BindError(f + ": app '" + a.name + "' is defined twice");
            apps.push_back(std::move(a));
        }
    return apps;
}

SystemConfig load_config_file(const std::string& path, const std::vector<AppSpec>& library, const Catalog& catalog) {
    return load_config(read_file(path), library, catalog, path);
}

} // namespace homesafe
