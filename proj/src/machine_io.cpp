#include "igamag/machine_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace igamag::io {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

geom::Side side_from(const std::string& s, const std::string& path, int line) {
    if (s == "u0") return geom::Side::U0;
    if (s == "u1") return geom::Side::U1;
    if (s == "v0") return geom::Side::V0;
    if (s == "v1") return geom::Side::V1;
    throw ParseError(path, line, "unknown side '" + s + "'");
}

geom::EdgeTag tag_from(const std::string& s, const std::string& path, int line) {
    if (s == "dirichlet") return geom::EdgeTag::Dirichlet;
    if (s == "left") return geom::EdgeTag::Left;
    if (s == "right") return geom::EdgeTag::Right;
    if (s == "airgap") return geom::EdgeTag::AirGap;
    throw ParseError(path, line, "unknown edge tag '" + s + "'");
}

// line-oriented tokenizer that tracks line numbers and skips comments
class Reader {
public:
    Reader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw std::runtime_error("cannot open '" + path + "'");
    }

    bool next_line() {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            const auto h = raw.find('#');
            if (h != std::string::npos) raw.erase(h);
            std::istringstream ss(raw);
            std::vector<std::string> toks;
            std::string t;
            while (ss >> t) toks.push_back(t);
            if (!toks.empty()) {
                toks_ = std::move(toks);
                pos_ = 0;
                return true;
            }
        }
        return false;
    }

    void require_line(const std::string& what) {
        if (!next_line()) throw ParseError(path_, line_, "unexpected end of file, expected " + what);
    }

    std::string word(const std::string& what) {
        if (pos_ >= toks_.size())
            throw ParseError(path_, line_, "missing token, expected " + what);
        return toks_[pos_++];
    }

    double number(const std::string& what) {
        const std::string s = word(what);
        try {
            size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError(path_, line_, "expected number for " + what + ", got '" + s + "'");
        }
    }

    int integer(const std::string& what) {
        const double v = number(what);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ParseError(path_, line_, "expected integer for " + what);
        return i;
    }

    void expect(const std::string& kw) {
        const std::string s = word("keyword '" + kw + "'");
        if (s != kw) throw ParseError(path_, line_, "expected '" + kw + "', got '" + s + "'");
    }

    bool at_end_of_line() const { return pos_ >= toks_.size(); }
    int line() const { return line_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::vector<std::string> toks_;
    size_t pos_ = 0;
    int line_ = 0;
};

}  // namespace

void write_machine(const geom::MultiPatchModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "igamag machine v1\n";
    out << "pole_count " << m.pole_count << "\n";
    out << "axial_length " << fmt(m.axial_length) << "\n";
    out << "rotor_angle " << fmt(m.rotor_angle) << "\n";

    out << "materials " << m.materials.size() << "\n";
    for (const auto& [name, mat] : m.materials) {
        out << "material " << name << " nu " << fmt(mat.nu) << " hpm " << fmt(mat.h_pm.x)
            << " " << fmt(mat.h_pm.y) << " jsrc " << fmt(mat.j_src) << "\n";
    }

    out << "windings " << m.windings.size() << "\n";
    for (const auto& w : m.windings)
        out << "winding " << w.phase << " " << w.region << " " << fmt(w.turns) << " "
            << w.polarity << " area " << fmt(w.area) << "\n";

    out << "patches " << m.patches.size() << "\n";
    for (size_t k = 0; k < m.patches.size(); ++k) {
        const geom::Patch& p = m.patches[k];
        out << "patch " << k << " " << to_string(m.subdomain[k]) << " " << p.region << "\n";
        out << "degrees " << p.ku.degree() << " " << p.kv.degree() << "\n";
        out << "knots_u " << p.ku.knots().size();
        for (double x : p.ku.knots()) out << " " << fmt(x);
        out << "\n";
        out << "knots_v " << p.kv.knots().size();
        for (double x : p.kv.knots()) out << " " << fmt(x);
        out << "\n";
        out << "net " << p.net.nu << " " << p.net.nv << "\n";
        for (int j = 0; j < p.net.nv; ++j)
            for (int i = 0; i < p.net.nu; ++i)
                out << "cp " << fmt(p.net.at(i, j).x) << " " << fmt(p.net.at(i, j).y)
                    << " " << fmt(p.net.weight(i, j)) << "\n";
    }

    size_t ntags = 0;
    for (const auto& tags : m.edge_tags)
        for (auto t : tags)
            if (t != geom::EdgeTag::None) ++ntags;
    out << "edges " << ntags << "\n";
    for (size_t k = 0; k < m.edge_tags.size(); ++k)
        for (int s = 0; s < 4; ++s)
            if (m.edge_tags[k][s] != geom::EdgeTag::None)
                out << "edge " << k << " " << to_string(static_cast<geom::Side>(s)) << " "
                    << to_string(m.edge_tags[k][s]) << "\n";
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

geom::MultiPatchModel read_machine(const std::string& path) {
    Reader r(path);
    geom::MultiPatchModel m;

    r.require_line("header");
    r.expect("igamag");
    r.expect("machine");
    r.expect("v1");

    r.require_line("pole_count");
    r.expect("pole_count");
    m.pole_count = r.integer("pole_count");
    if (m.pole_count < 2 || m.pole_count % 2 != 0)
        throw ParseError(path, r.line(), "pole_count must be a positive even number");

    r.require_line("axial_length");
    r.expect("axial_length");
    m.axial_length = r.number("axial_length");

    r.require_line("rotor_angle");
    r.expect("rotor_angle");
    m.rotor_angle = r.number("rotor_angle");

    r.require_line("materials");
    r.expect("materials");
    const int nmat = r.integer("material count");
    for (int i = 0; i < nmat; ++i) {
        r.require_line("material");
        r.expect("material");
        const std::string name = r.word("material name");
        geom::Material mat;
        const std::string kind = r.word("nu or mur");
        if (kind == "nu")
            mat.nu = r.number("nu");
        else if (kind == "mur")
            mat.nu = geom::kNu0 / r.number("mur");
        else
            throw ParseError(path, r.line(), "expected 'nu' or 'mur'");
        if (!(mat.nu > 0.0)) throw ParseError(path, r.line(), "reluctivity must be positive");
        while (!r.at_end_of_line()) {
            const std::string key = r.word("material key");
            if (key == "hpm") {
                mat.h_pm.x = r.number("hpm x");
                mat.h_pm.y = r.number("hpm y");
            } else if (key == "jsrc") {
                mat.j_src = r.number("jsrc");
            } else {
                throw ParseError(path, r.line(), "unknown material key '" + key + "'");
            }
        }
        m.materials[name] = mat;
    }

    r.require_line("windings");
    r.expect("windings");
    const int nwind = r.integer("winding count");
    for (int i = 0; i < nwind; ++i) {
        r.require_line("winding");
        r.expect("winding");
        geom::Winding w;
        w.phase = r.word("phase");
        w.region = r.word("region");
        w.turns = r.number("turns");
        w.polarity = r.integer("polarity");
        if (w.polarity != 1 && w.polarity != -1)
            throw ParseError(path, r.line(), "polarity must be +1 or -1");
        r.expect("area");
        w.area = r.number("area");
        if (!(w.area > 0.0)) throw ParseError(path, r.line(), "winding area must be positive");
        m.windings.push_back(w);
    }

    r.require_line("patches");
    r.expect("patches");
    const int npatch = r.integer("patch count");
    for (int k = 0; k < npatch; ++k) {
        r.require_line("patch");
        r.expect("patch");
        const int idx = r.integer("patch index");
        if (idx != k) throw ParseError(path, r.line(), "patches must be listed in order");
        const std::string sd = r.word("subdomain");
        if (sd != "rotor" && sd != "stator")
            throw ParseError(path, r.line(), "subdomain must be rotor or stator");
        geom::Patch p;
        p.region = r.word("region");

        r.require_line("degrees");
        r.expect("degrees");
        const int pu = r.integer("degree u");
        const int pv = r.integer("degree v");

        auto read_knots = [&](const char* kw, int degree) {
            r.require_line(kw);
            r.expect(kw);
            const int cnt = r.integer("knot count");
            std::vector<double> knots(cnt);
            for (int i = 0; i < cnt; ++i) knots[i] = r.number("knot");
            try {
                return splines::KnotVector(degree, std::move(knots));
            } catch (const std::exception& e) {
                throw ParseError(path, r.line(), e.what());
            }
        };
        p.ku = read_knots("knots_u", pu);
        p.kv = read_knots("knots_v", pv);

        r.require_line("net");
        r.expect("net");
        p.net.nu = r.integer("net nu");
        p.net.nv = r.integer("net nv");
        if (p.net.nu != p.ku.num_funcs() || p.net.nv != p.kv.num_funcs())
            throw ParseError(path, r.line(), "net dimensions inconsistent with knot vectors");
        p.net.pts.resize(p.net.nu * p.net.nv);
        p.net.w.resize(p.net.nu * p.net.nv);
        for (int j = 0; j < p.net.nv; ++j)
            for (int i = 0; i < p.net.nu; ++i) {
                r.require_line("cp");
                r.expect("cp");
                p.net.at(i, j).x = r.number("x");
                p.net.at(i, j).y = r.number("y");
                const double w = r.number("weight");
                if (!(w > 0.0)) throw ParseError(path, r.line(), "weights must be positive");
                p.net.w[j * p.net.nu + i] = w;
            }

        m.patches.push_back(std::move(p));
        m.subdomain.push_back(sd == "rotor" ? geom::Subdomain::Rotor
                                            : geom::Subdomain::Stator);
        m.edge_tags.push_back({geom::EdgeTag::None, geom::EdgeTag::None,
                               geom::EdgeTag::None, geom::EdgeTag::None});
    }

    r.require_line("edges");
    r.expect("edges");
    const int nedge = r.integer("edge count");
    for (int i = 0; i < nedge; ++i) {
        r.require_line("edge");
        r.expect("edge");
        const int k = r.integer("patch index");
        if (k < 0 || k >= npatch) throw ParseError(path, r.line(), "edge patch index out of range");
        const geom::Side s = side_from(r.word("side"), path, r.line());
        m.edge_tags[k][static_cast<int>(s)] = tag_from(r.word("tag"), path, r.line());
    }

    r.require_line("end");
    r.expect("end");
    return m;
}

}  // namespace igamag::io
