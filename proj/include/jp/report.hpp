#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace jp {

/**
 * Layered run configuration. Values are canonical lowercase-dashed keys
 * ("k", "eps", "max-queries", ...) mapped to strings; typed getters parse on
 * demand. Precedence (lowest to highest): config file, JUNTA_PROBE_* env
 * overrides, command-line flags.
 */
struct RunConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    void set(const std::string& key, std::string value) { values[key] = std::move(value); }

    std::string get_str(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    nlohmann::json echo() const;  ///< config snapshot for reports
};

/// Plain-text key-value config ("key = value" or "key value"; '#' comments).
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Env name for a key: "max-queries" -> "JUNTA_PROBE_MAX_QUERIES".
std::string env_name_for_key(const std::string& key);

/// Overlay JUNTA_PROBE_* variables (getenv-like hook injectable for tests).
void apply_env_overrides(RunConfig& cfg, const std::vector<std::string>& keys,
                         const std::function<const char*(const char*)>& getenv_fn);

/**
 * One experiment result, serialized as a single JSON object per line. The
 * deterministic part (config echo, seed, payload) is kept separate from
 * wall-clock timings so reproducibility checks can compare payload bytes.
 */
struct ExperimentReport {
    std::string version = "junta-probe 0.1.0";
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json payload = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();

    std::string to_jsonl() const;           ///< one line, keys sorted, no trailing \n
    std::string payload_bytes() const;      ///< deterministic serialization of payload only
    static ExperimentReport from_jsonl(const std::string& line);
};

/// Append a report line (plus newline) to path; "-" writes to stdout.
void append_report(const std::string& path, const ExperimentReport& report);

}  // namespace jp
