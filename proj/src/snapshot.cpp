#include "toricflow/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "toricflow/errors.hpp"

namespace toricflow {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw NumericError("malformed number in snapshot: '" + s + "'");
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot " + path);
    out << "toricflow-snapshot " << s.version << '\n';
    out << "preset " << s.preset << '\n';
    out << "weights " << s.weights << '\n';
    out << "N " << s.N << '\n';
    out << "L " << format_double(s.L) << '\n';
    out << "t " << format_double(s.t) << '\n';
    out << "gauge_constant " << format_double(s.gauge_constant) << '\n';
    out << "drift " << format_double(s.drift[0]) << ' ' << format_double(s.drift[1]) << '\n';
    out << "values " << s.phi.size() << '\n';
    for (Eigen::Index k = 0; k < s.phi.size(); ++k) out << format_double(s.phi[k]) << '\n';
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read snapshot " + path);
    Snapshot s;
    std::string key, line;
    in >> key >> s.version;
    if (key != "toricflow-snapshot" || s.version != 1)
        throw std::runtime_error("not a version 1 snapshot: " + path);
    std::string v1, v2;
    long count = -1;
    while (count < 0 && in >> key) {
        if (key == "preset") in >> s.preset;
        else if (key == "weights") in >> s.weights;
        else if (key == "N") in >> s.N;
        else if (key == "L") { in >> v1; s.L = parse_double(v1); }
        else if (key == "t") { in >> v1; s.t = parse_double(v1); }
        else if (key == "gauge_constant") { in >> v1; s.gauge_constant = parse_double(v1); }
        else if (key == "drift") { in >> v1 >> v2; s.drift = {parse_double(v1), parse_double(v2)}; }
        else if (key == "values") in >> count;
        else throw std::runtime_error("unknown snapshot header key '" + key + "'");
    }
    if (count != static_cast<long>(s.N + 1) * (s.N + 1))
        throw std::runtime_error("snapshot value count does not match N");
    s.phi.resize(count);
    for (long k = 0; k < count; ++k) {
        if (!(in >> v1)) throw std::runtime_error("truncated snapshot " + path);
        s.phi[k] = parse_double(v1);
    }
    return s;
}

}  // namespace toricflow
