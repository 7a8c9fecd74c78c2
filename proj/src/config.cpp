#include "toricflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "toricflow/errors.hpp"
#include "toricflow/polytope.hpp"
#include "toricflow/reference.hpp"
#include "toricflow/snapshot.hpp"

namespace toricflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("key " + key + ": expected a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("key " + key + ": expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("key " + key + ": expected on or off, got '" + v + "'");
}

std::vector<double> parse_table(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_double("weights", trim(item)));
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::set<std::string> seen;
    std::stringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("key " + key + " given twice");
        if (key == "preset") c.preset = val;
        else if (key == "weights") c.weights = val;
        else if (key == "N") c.N = to_int(key, val);
        else if (key == "L") c.L = to_double(key, val);
        else if (key == "sigma") c.sigma = to_double(key, val);
        else if (key == "t_end") c.t_end = to_double(key, val);
        else if (key == "snapshot_every") c.snapshot_every = to_double(key, val);
        else if (key == "output") c.output = val;
        else if (key == "lambda1") c.lambda1 = to_bool(key, val);
        else if (key == "legendre") c.legendre = to_bool(key, val);
        else if (key == "initial") c.initial = val;
        else if (key == "initial_file") c.initial_file = val;
        else if (key == "bump_amplitude") c.bump_amplitude = to_double(key, val);
        else if (key == "bump_width") c.bump_width = to_double(key, val);
        else throw ConfigError("unknown key " + key);
    }
    if (!seen.count("snapshot_every")) c.snapshot_every = std::min(0.5, c.t_end);
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "preset = " << c.preset << '\n'
       << "weights = " << c.weights << '\n'
       << "N = " << c.N << '\n'
       << "L = " << format_double(c.L) << '\n'
       << "sigma = " << format_double(c.sigma) << '\n'
       << "t_end = " << format_double(c.t_end) << '\n'
       << "snapshot_every = " << format_double(c.snapshot_every) << '\n'
       << "output = " << c.output << '\n'
       << "lambda1 = " << (c.lambda1 ? "on" : "off") << '\n'
       << "legendre = " << (c.legendre ? "on" : "off") << '\n'
       << "initial = " << c.initial << '\n';
    if (!c.initial_file.empty()) os << "initial_file = " << c.initial_file << '\n';
    os << "bump_amplitude = " << format_double(c.bump_amplitude) << '\n'
       << "bump_width = " << format_double(c.bump_width) << '\n';
    return os.str();
}

void validate(const RunConfig& c) {
    if (c.preset.empty()) throw ConfigError("key preset is required (one of cp2, p1xp1, bl1, bl2, bl3)");
    preset(c.preset);
    if (c.N < 32 || c.N % 2 != 0) throw ConfigError("key N: must be an even integer >= 32");
    if (!(c.L >= 8 && c.L <= 20)) throw ConfigError("key L: must lie in [8, 20]");
    if (!(c.sigma > 0 && c.sigma <= 0.5)) throw ConfigError("key sigma: must lie in (0, 0.5]");
    if (!(c.t_end > 0)) throw ConfigError("key t_end: must be > 0");
    if (!(c.snapshot_every > 0 && c.snapshot_every <= c.t_end))
        throw ConfigError("key snapshot_every: must lie in (0, t_end]");
    if (c.output.empty()) throw ConfigError("key output: must not be empty");
    if (c.initial != "zero" && c.initial != "file" && c.initial != "bump")
        throw ConfigError("key initial: must be zero, file or bump");
    if (c.initial == "file" && c.initial_file.empty())
        throw ConfigError("key initial_file: required when initial = file");
    if (!(c.bump_width > 0)) throw ConfigError("key bump_width: must be > 0");
    config_weights(c);
}

std::vector<double> config_weights(const RunConfig& c) {
    const FanoPreset& p = preset(c.preset);
    if (c.weights == "default" || c.weights == "round") return weights_for(p, c.weights);
    const auto w = parse_table(c.weights);
    if (w.size() != p.polytope.lattice_points().size())
        throw ConfigError("key weights: expected " + std::to_string(p.polytope.lattice_points().size()) +
                          " comma-separated values (one per lattice point)");
    for (double v : w)
        if (!(v > 0)) throw ConfigError("key weights: values must be > 0");
    return w;
}

}  // namespace toricflow
