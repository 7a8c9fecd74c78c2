#include "toricflow/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "toricflow/errors.hpp"

namespace toricflow {

namespace {

long cross(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

LatticePoint primitive(long x, long y) {
    long g = std::gcd(std::labs(x), std::labs(y));
    if (g == 0) throw DomainError("zero-length edge");
    return {x / g, y / g};
}

long factorial(long n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

Rational Rational::make(long n, long d) {
    if (d == 0) throw DomainError("zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    long g = std::gcd(std::labs(n), d);
    if (g == 0) g = 1;
    return {n / g, d / g};
}

Polytope::Polytope(std::vector<LatticePoint> ccw_vertices) : vertices_(std::move(ccw_vertices)) {
    const int n = static_cast<int>(vertices_.size());
    if (n < 3) throw DomainError("polytope needs at least three vertices");
    for (int i = 0; i < n; ++i) {
        const auto& a = vertices_[i];
        const auto& b = vertices_[(i + 1) % n];
        Edge e;
        e.from = i;
        e.to = (i + 1) % n;
        long dx = b[0] - a[0], dy = b[1] - a[1];
        e.lattice_length = std::gcd(std::labs(dx), std::labs(dy));
        e.direction = primitive(dx, dy);
        e.normal = {e.direction[1], -e.direction[0]};
        e.support = a[0] * e.normal[0] + a[1] * e.normal[1];
        edges_.push_back(e);
    }
    long lo0 = vertices_[0][0], hi0 = lo0, lo1 = vertices_[0][1], hi1 = lo1;
    for (const auto& v : vertices_) {
        lo0 = std::min(lo0, v[0]);
        hi0 = std::max(hi0, v[0]);
        lo1 = std::min(lo1, v[1]);
        hi1 = std::max(hi1, v[1]);
    }
    for (long x = lo0; x <= hi0; ++x)
        for (long y = lo1; y <= hi1; ++y)
            if (contains({x, y})) points_.push_back({x, y});
}

bool Polytope::contains(const LatticePoint& p) const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (cross(vertices_[i], vertices_[(i + 1) % n], p) < 0) return false;
    return true;
}

Rational Polytope::area() const {
    long twice = 0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices_[i];
        const auto& b = vertices_[(i + 1) % n];
        twice += a[0] * b[1] - a[1] * b[0];
    }
    return Rational::make(twice, 2);
}

std::array<Rational, 2> Polytope::barycenter() const {
    long twice = 0, sx = 0, sy = 0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices_[i];
        const auto& b = vertices_[(i + 1) % n];
        long c = a[0] * b[1] - a[1] * b[0];
        twice += c;
        sx += (a[0] + b[0]) * c;
        sy += (a[1] + b[1]) * c;
    }
    return {Rational::make(sx, 3 * twice), Rational::make(sy, 3 * twice)};
}

bool Polytope::is_convex() const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) <= 0) return false;
    return true;
}

bool Polytope::is_delzant() const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = vertices_[i];
        const auto& p = vertices_[(i + n - 1) % n];
        const auto& q = vertices_[(i + 1) % n];
        auto a = primitive(p[0] - v[0], p[1] - v[1]);
        auto b = primitive(q[0] - v[0], q[1] - v[1]);
        if (std::labs(a[0] * b[1] - a[1] * b[0]) != 1) return false;
    }
    return true;
}

bool Polytope::is_reflexive() const {
    return std::all_of(edges_.begin(), edges_.end(),
                       [](const Edge& e) { return std::labs(e.support) == 1; });
}

bool IntersectionForm::is_symmetric() const {
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix[i].size() != n) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (matrix[i][j] != matrix[j][i]) return false;
    }
    return true;
}

long IntersectionForm::determinant() const {
    // Bareiss fraction-free elimination.
    const std::size_t n = matrix.size();
    if (n == 0) return 1;
    auto a = matrix;
    long sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

std::pair<int, int> IntersectionForm::signature() const {
    const int n = static_cast<int>(matrix.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = static_cast<double>(matrix[i][j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    int pos = 0, neg = 0;
    for (int i = 0; i < n; ++i) {
        if (es.eigenvalues()[i] > 1e-9) ++pos;
        if (es.eigenvalues()[i] < -1e-9) ++neg;
    }
    return {pos, neg};
}

long IntersectionForm::evaluate(const std::vector<long>& v) const {
    long s = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) s += v[i] * matrix[i][j] * v[j];
    return s;
}

namespace {

IntersectionForm blowup_form(int k) {
    IntersectionForm f;
    f.matrix.assign(k + 1, std::vector<long>(k + 1, 0));
    f.matrix[0][0] = 1;
    f.basis_labels.push_back("H");
    for (int i = 1; i <= k; ++i) {
        f.matrix[i][i] = -1;
        f.basis_labels.push_back("E" + std::to_string(i));
    }
    return f;
}

std::vector<FanoPreset> build_catalog() {
    std::vector<FanoPreset> out;
    auto add = [&](std::string name, std::vector<LatticePoint> verts, IntersectionForm form,
                   long c1sq, int b2, bool fz) {
        FanoPreset p;
        p.name = std::move(name);
        p.polytope = Polytope(std::move(verts));
        p.intersection_form = std::move(form);
        p.c1_squared = c1sq;
        p.b2 = b2;
        p.futaki_expected_zero = fz;
        out.push_back(std::move(p));
    };
    add("cp2", {{-1, -1}, {2, -1}, {-1, 2}}, blowup_form(0), 9, 1, true);
    add("p1xp1", {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}},
        IntersectionForm{{{0, 1}, {1, 0}}, {"F1", "F2"}}, 8, 2, true);
    add("bl1", {{-1, -1}, {2, -1}, {0, 1}, {-1, 1}}, blowup_form(1), 8, 2, false);
    add("bl2", {{0, -1}, {2, -1}, {0, 1}, {-1, 1}, {-1, 0}}, blowup_form(2), 7, 3, false);
    add("bl3", {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}, blowup_form(3), 6, 4, true);

    // Multinomial weights: the Fubini-Study and round product potentials.
    for (auto& p : out) {
        if (p.name == "cp2") {
            for (const auto& l : p.polytope.lattice_points()) {
                long i = l[0] + 1, j = l[1] + 1, k = 3 - i - j;
                p.round_weights.push_back(static_cast<double>(
                    factorial(3) / (factorial(i) * factorial(j) * factorial(k))));
            }
        } else if (p.name == "p1xp1") {
            const double c[3] = {1.0, 2.0, 1.0};
            for (const auto& l : p.polytope.lattice_points())
                p.round_weights.push_back(c[l[0] + 1] * c[l[1] + 1]);
        }
    }
    return out;
}

const std::vector<FanoPreset>& catalog() {
    static const std::vector<FanoPreset> c = build_catalog();
    return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"cp2", "p1xp1", "bl1", "bl2", "bl3"};
    return names;
}

const FanoPreset& preset(std::string_view name) {
    for (const auto& p : catalog())
        if (p.name == name) return p;
    throw ConfigError("unknown preset '" + std::string(name) +
                      "'; valid presets: cp2, p1xp1, bl1, bl2, bl3");
}

std::vector<double> divisor_targets(const FanoPreset& p) {
    std::vector<double> out;
    for (const auto& e : p.polytope.edges())
        out.push_back(2.0 * M_PI * static_cast<double>(e.lattice_length));
    return out;
}

std::optional<std::vector<long>> minus_two_class_search(const IntersectionForm& form,
                                                         long bound) {
    if (!form.is_symmetric()) throw DomainError("intersection form is not symmetric");
    if (bound < 1) throw DomainError("bound must be at least 1");
    const std::size_t n = form.rank();
    if (n == 0) return std::nullopt;
    // Shells of increasing sup norm, lexicographic inside each shell.
    for (long r = 1; r <= bound; ++r) {
        std::vector<long> v(n, -r);
        bool done = false;
        while (!done) {
            long m = 0;
            for (long c : v) m = std::max(m, std::labs(c));
            if (m == r && form.evaluate(v) == -2) {
                auto first = std::find_if(v.begin(), v.end(), [](long c) { return c != 0; });
                if (*first < 0)
                    for (auto& c : v) c = -c;
                return v;
            }
            std::size_t k = n;
            while (true) {
                if (k == 0) {
                    done = true;
                    break;
                }
                --k;
                if (v[k] < r) {
                    ++v[k];
                    break;
                }
                v[k] = -r;
            }
        }
    }
    return std::nullopt;
}

nlohmann::json preset_json(const FanoPreset& p) {
    nlohmann::json j;
    j["name"] = p.name;
    j["vertices"] = p.polytope.vertices();
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : p.polytope.edges())
        edges.push_back({{"from", p.polytope.vertices()[e.from]},
                         {"to", p.polytope.vertices()[e.to]},
                         {"normal", e.normal},
                         {"lattice_length", e.lattice_length}});
    j["edges"] = edges;
    j["lattice_points"] = p.polytope.lattice_points();
    j["intersection_form"] = {{"matrix", p.intersection_form.matrix},
                              {"basis", p.intersection_form.basis_labels}};
    j["c1_squared"] = p.c1_squared;
    j["b2"] = p.b2;
    j["futaki_expected_zero"] = p.futaki_expected_zero;
    auto a = p.polytope.area();
    j["area"] = {a.num, a.den};
    if (!p.round_weights.empty()) j["round_weights"] = p.round_weights;
    return j;
}

nlohmann::json catalog_json() {
    nlohmann::json j;
    j["format"] = "toricflow-presets";
    j["version"] = 1;
    j["conventions"] = {
        {"coordinates", "x_j = log|z_j|^2"},
        {"volume", "(2 pi)^2 * area(P)"},
        {"divisor_area", "2 pi * lattice length"}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& name : preset_names()) arr.push_back(preset_json(preset(name)));
    j["presets"] = arr;
    return j;
}

}  // namespace toricflow
