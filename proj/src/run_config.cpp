#include "dips/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dips/simulation.hpp"

namespace dips {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + num(x);
    return s;
}

template <class T>
T parse_int(const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
    if constexpr (std::is_unsigned_v<T>) {
        if (x < 0) throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
    }
    return static_cast<T>(x);
}

double parse_double(const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("expected a number, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected true/false, got '" + v + "'");
}

struct Field {
    const char* section;
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> f{
        {"statistic", "kind", [](RunConfig& c, const std::string& v) { c.kind = v; },
         [](const RunConfig& c) { return std::optional<std::string>(c.kind); }},
        {"statistic", "n", [](RunConfig& c, const std::string& v) { c.n = parse_int<int>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.n)); }},
        {"statistic", "n1", [](RunConfig& c, const std::string& v) { c.n1 = parse_int<int>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.n1)); }},
        {"statistic", "n2", [](RunConfig& c, const std::string& v) { c.n2 = parse_int<int>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.n2)); }},
        {"statistic", "normalization", [](RunConfig& c, const std::string& v) { c.normalization = v; },
         [](const RunConfig& c) { return std::optional<std::string>(c.normalization); }},
        {"simulation", "num_samples",
         [](RunConfig& c, const std::string& v) { c.num_samples = parse_int<std::uint64_t>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.num_samples)); }},
        {"simulation", "seed", [](RunConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.seed)); }},
        {"simulation", "workers", [](RunConfig& c, const std::string& v) { c.workers = parse_int<int>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.workers)); }},
        {"simulation", "z_max",
         [](RunConfig& c, const std::string& v) {
             if (v != "auto_n16") parse_double(v);
             c.z_max = v;
         },
         [](const RunConfig& c) { return std::optional<std::string>(c.z_max); }},
        {"simulation", "z_points", [](RunConfig& c, const std::string& v) { c.z_points = parse_int<int>(v); },
         [](const RunConfig& c) { return std::optional<std::string>(std::to_string(c.z_points)); }},
        {"simulation", "z_grid", [](RunConfig& c, const std::string& v) { c.z_grid = parse_number_list(v); },
         [](const RunConfig& c) {
             return c.z_grid.empty() ? std::nullopt : std::optional<std::string>(list(c.z_grid));
         }},
        {"simulation", "allow_beyond_cap",
         [](RunConfig& c, const std::string& v) { c.allow_beyond_cap = parse_bool(v); },
         [](const RunConfig& c) { return std::optional<std::string>(c.allow_beyond_cap ? "true" : "false"); }},
        {"simulation", "snap_lattice", [](RunConfig& c, const std::string& v) { c.snap_lattice = parse_bool(v); },
         [](const RunConfig& c) { return std::optional<std::string>(c.snap_lattice ? "true" : "false"); }},
        {"envelope", "theta", [](RunConfig& c, const std::string& v) { c.theta = parse_double(v); },
         [](const RunConfig& c) { return std::optional<std::string>(num(c.theta)); }},
        {"envelope", "c1", [](RunConfig& c, const std::string& v) { c.c1 = parse_double(v); },
         [](const RunConfig& c) { return std::optional<std::string>(num(c.c1)); }},
        {"envelope", "delta1_c", [](RunConfig& c, const std::string& v) { c.delta1_c = parse_double(v); },
         [](const RunConfig& c) { return std::optional<std::string>(num(c.delta1_c)); }},
        {"envelope", "delta", [](RunConfig& c, const std::string& v) { c.delta = parse_double(v); },
         [](const RunConfig& c) { return c.delta ? std::optional<std::string>(num(*c.delta)) : std::nullopt; }},
        {"envelope", "z", [](RunConfig& c, const std::string& v) { c.z_list = parse_number_list(v); },
         [](const RunConfig& c) {
             return c.z_list.empty() ? std::nullopt : std::optional<std::string>(list(c.z_list));
         }},
        {"envelope", "t", [](RunConfig& c, const std::string& v) { c.t_list = parse_number_list(v); },
         [](const RunConfig& c) {
             return c.t_list.empty() ? std::nullopt : std::optional<std::string>(list(c.t_list));
         }},
        {"output", "out", [](RunConfig& c, const std::string& v) { c.out = v; },
         [](const RunConfig& c) { return c.out.empty() ? std::nullopt : std::optional<std::string>(c.out); }},
    };
    return f;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields())
        if (section == f.section && key == f.key) return &f;
    return nullptr;
}

void apply(RunConfig& c, const std::string& section, const std::string& key, const std::string& value,
           std::vector<std::string>& problems) {
    const Field* f = find_field(section, key);
    if (!f) {
        problems.push_back("unknown key '" + section + "." + key + "'");
        return;
    }
    try {
        f->set(c, value);
    } catch (const std::exception& e) {
        problems.push_back(section + "." + key + ": " + e.what());
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

std::vector<double> parse_number_list(const std::string& text) {
    std::string s = text;
    for (char& ch : s)
        if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok));
    return out;
}

RunConfig RunConfig::parse_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")"});
    }
    RunConfig c;
    std::vector<std::string> problems;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            problems.push_back("key '" + section + "' outside a [section]");
            continue;
        }
        for (const auto& [key, value] : body) apply(c, section, key, value.get_value<std::string>(), problems);
    }
    if (!problems.empty()) throw ConfigError(problems);
    return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& root) {
    const nlohmann::json& j = root.contains("config") ? root.at("config") : root;
    if (!j.is_object()) throw ConfigError({"JSON config must be an object"});
    RunConfig c;
    std::vector<std::string> problems;
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object()) {
            problems.push_back("JSON section '" + section + "' must be an object");
            continue;
        }
        for (const auto& [key, value] : body.items()) {
            apply(c, section, key, value.is_string() ? value.get<std::string>() : value.dump(), problems);
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError({std::string("JSON config: ") + e.what()});
        }
        return from_json(j);
    }
    return parse_text(text);
}

std::string RunConfig::to_text() const {
    std::string out, current;
    for (const auto& f : fields()) {
        const auto v = f.get(*this);
        if (!v) continue;
        if (current != f.section) {
            out += (out.empty() ? "[" : "\n[") + std::string(f.section) + "]\n";
            current = f.section;
        }
        out += std::string(f.key) + " = " + *v + "\n";
    }
    return out;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : fields()) {
        if (const auto v = f.get(*this)) j[f.section][f.key] = *v;
    }
    return j;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    std::vector<std::string> problems;
    apply(*this, section, key, value, problems);
    if (!problems.empty()) throw ConfigError(problems);
}

StatisticSpec RunConfig::statistic_spec() const {
    StatisticSpec s;
    s.kind = parse_statistic_kind(kind);
    s.normalization = parse_normalization(normalization);
    if (s.kind == StatisticKind::mww) {
        s.n1 = n1;
        s.n2 = n2;
        s.n = n > 0 ? n : n1 + n2;
    } else {
        s.n = n;
    }
    s.validate();
    return s;
}

std::vector<double> RunConfig::simulation_grid() const {
    const StatisticSpec spec = statistic_spec();
    std::vector<double> g;
    if (!z_grid.empty()) {
        g = z_grid;
    } else {
        const double cap = z_cap(spec);
        const double top = z_max == "auto_n16" ? cap : std::stod(z_max);
        for (int t = 0; t < z_points; ++t) {
            const double z = z_points == 1 ? 0.0 : top * t / (z_points - 1);
            if (z > cap && !allow_beyond_cap) break;
            g.push_back(z);
        }
    }
    if (snap_lattice) g = snap_to_lattice(spec, g);
    return g;
}

void RunConfig::validate(bool needs_statistic) const {
    std::vector<std::string> p;
    bool kind_ok = true;
    try {
        parse_statistic_kind(kind);
    } catch (const std::exception& e) {
        p.push_back(std::string("statistic.kind: ") + e.what());
        kind_ok = false;
    }
    try {
        parse_normalization(normalization);
    } catch (const std::exception& e) {
        p.push_back(std::string("statistic.normalization: ") + e.what());
    }
    if (needs_statistic && kind_ok) {
        if (kind == "mww") {
            if (n1 < 1 || n2 < 1) p.push_back("statistic.n1/n2: mww needs n1 >= 1 and n2 >= 1");
            if (n != 0 && n != n1 + n2) p.push_back("statistic.n: must equal n1 + n2 for mww");
        } else if (n < 2) {
            p.push_back("statistic.n: must be at least 2");
        }
    }
    if (workers < 1) p.push_back("simulation.workers: must be at least 1");
    if (z_points < 1) p.push_back("simulation.z_points: must be at least 1");
    if (z_max != "auto_n16" && std::stod(z_max) < 0) p.push_back("simulation.z_max: must be >= 0");
    if (!(theta > 0)) p.push_back("envelope.theta: must be positive");
    if (!(c1 > 0)) p.push_back("envelope.c1: must be positive");
    if (!(delta1_c > 0)) p.push_back("envelope.delta1_c: must be positive");
    if (delta && !(*delta > 0)) p.push_back("envelope.delta: must be positive");
    for (std::size_t t = 1; t < z_grid.size(); ++t)
        if (!(z_grid[t] > z_grid[t - 1])) {
            p.push_back("simulation.z_grid: must be strictly increasing");
            break;
        }
    for (double z : z_grid)
        if (z < 0) {
            p.push_back("simulation.z_grid: values must be >= 0");
            break;
        }
    if (!p.empty()) throw ConfigError(p);
}

}  // namespace dips
