#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dips/closed_form_statistics.hpp"

namespace dips {

// All problems found while reading or validating a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct RunConfig {
    // [statistic]
    std::string kind = "descents";
    int n = 0;
    int n1 = 0;
    int n2 = 0;
    std::string normalization = "variance_exact";
    // [simulation]
    std::uint64_t num_samples = 1000000;
    std::uint64_t seed = 42;
    int workers = 1;
    std::string z_max = "2";  // number or "auto_n16"
    int z_points = 5;
    std::vector<double> z_grid;  // explicit grid, overrides z_max/z_points
    bool allow_beyond_cap = false;
    bool snap_lattice = false;
    // [envelope]
    double theta = 1.0;
    double c1 = 1.0;
    double delta1_c = 1.0;
    std::optional<double> delta;
    std::vector<double> z_list;
    std::vector<double> t_list;
    // [output]
    std::string out;

    // key=value text with [statistic], [simulation], [envelope], [output] sections.
    static RunConfig parse_text(const std::string& text);
    // Either the text format or a JSON object (a sidecar's "config" member, or the sidecar itself).
    static RunConfig load_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);

    std::string to_text() const;
    nlohmann::json to_json() const;

    // Sets one entry ("section.key" or bare key); used for flag overrides.
    void set(const std::string& section, const std::string& key, const std::string& value);

    StatisticSpec statistic_spec() const;
    // Grid for simulations: explicit list, or z_max/z_points truncated at the range cap.
    std::vector<double> simulation_grid() const;

    // Collects every problem; throws ConfigError if any. `needs_statistic` demands n etc.
    void validate(bool needs_statistic) const;
};

std::vector<double> parse_number_list(const std::string& text);

}  // namespace dips
