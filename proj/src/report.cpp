#include "jp/report.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace jp {

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config field '" + key + "': expected a number, got '" +
                                    it->second + "'");
    }
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config field '" + key + "': expected an integer, got '" +
                                    it->second + "'");
    }
}

nlohmann::json RunConfig::echo() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values) j[k] = v;
    return j;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t sep = line.find('=');
        if (sep == std::string::npos) sep = line.find_first_of(" \t");
        if (sep == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, sep));
        const std::string value = trim(line.substr(sep + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        cfg.set(key, value);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string env_name_for_key(const std::string& key) {
    std::string out = "JUNTA_PROBE_";
    for (char c : key)
        out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void apply_env_overrides(RunConfig& cfg, const std::vector<std::string>& keys,
                         const std::function<const char*(const char*)>& getenv_fn) {
    for (const auto& key : keys) {
        const char* v = getenv_fn(env_name_for_key(key).c_str());
        if (v != nullptr && *v != '\0') cfg.set(key, v);
    }
}

std::string ExperimentReport::payload_bytes() const { return payload.dump(); }

std::string ExperimentReport::to_jsonl() const {
    nlohmann::json j;
    j["version"] = version;
    j["seed"] = seed;
    j["config"] = config;
    j["payload"] = payload;
    j["timings"] = timings;
    return j.dump();  // keys sorted by nlohmann's object map: deterministic
}

ExperimentReport ExperimentReport::from_jsonl(const std::string& line) {
    const nlohmann::json j = nlohmann::json::parse(line);
    ExperimentReport r;
    r.version = j.at("version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.at("config");
    r.payload = j.at("payload");
    r.timings = j.at("timings");
    return r;
}

void append_report(const std::string& path, const ExperimentReport& report) {
    if (path == "-" || path.empty()) {
        std::cout << report.to_jsonl() << "\n";
        return;
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open report file '" + path + "'");
    out << report.to_jsonl() << "\n";
}

}  // namespace jp
