#include "spinorbit/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace spinorbit {

void PhysicalParams::validate() const {
    if (!(m0 > 0.0) || !(m > 0.0)) throw DomainError("params: masses must be positive");
    if (!(Re > 0.0) || !(a > 0.0)) throw DomainError("params: lengths must be positive");
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("params: eccentricity outside [0,1)");
    if (!(i > 0.0 && i < M_PI / 2)) throw DomainError("params: inclination outside (0, pi/2)");
    if (!(c > 0.0 && c <= 2.0 / 3.0)) throw DomainError("params: c outside (0, 2/3]");
    if (!(n > 0.0)) throw DomainError("params: mean motion must be positive");
    if (!(J2 > 0.0)) throw DomainError("params: J2 must be positive (C20 = -J2 < 0)");
    if (!(C22 > 0.0)) throw DomainError("params: C22 must be positive");
}

PhysicalParams mercury_params() {
    PhysicalParams p;
    p.m0 = 1.98843e30;
    p.m = 3.30104e23;
    p.Re = 2439.7;
    p.J2 = 5.031e-5;
    p.C22 = 8.088e-6;
    p.c = 3.49e-1;
    p.a = 5.79091e7;
    p.e = 2.05630e-1;
    p.i = 1.50098e-1;
    p.omega_dot = 1.34118e-7;
    p.Omega_dot = -5.23390e-8;
    p.n = 7.1229e-2;
    return p;
}

PhysicalParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file: " + path);
    std::map<std::string, double*> fields;
    PhysicalParams p;
    fields["m0"] = &p.m0;
    fields["m"] = &p.m;
    fields["Re"] = &p.Re;
    fields["J2"] = &p.J2;
    fields["C22"] = &p.C22;
    fields["c"] = &p.c;
    fields["a"] = &p.a;
    fields["e"] = &p.e;
    fields["i"] = &p.i;
    fields["omega_dot"] = &p.omega_dot;
    fields["Omega_dot"] = &p.Omega_dot;
    fields["n"] = &p.n;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string key;
        double value;
        if (!(ls >> key)) continue;  // blank
        if (!(ls >> value))
            throw ConfigError("params file " + path + ": bad value at line " +
                              std::to_string(lineno));
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("params file " + path + ": unknown key '" + key + "'");
        *it->second = value;
    }
    p.validate();
    return p;
}

void save_params(const PhysicalParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write params file: " + path);
    char buf[64];
    auto w = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.16e", v);
        out << key << ' ' << buf << '\n';
    };
    w("m0", p.m0);
    w("m", p.m);
    w("Re", p.Re);
    w("J2", p.J2);
    w("C22", p.C22);
    w("c", p.c);
    w("a", p.a);
    w("e", p.e);
    w("i", p.i);
    w("omega_dot", p.omega_dot);
    w("Omega_dot", p.Omega_dot);
    w("n", p.n);
}

}  // namespace spinorbit
