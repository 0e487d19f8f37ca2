#include "homolab/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace homolab {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: invalid number for key '" + key + "': " + s);
    }
}

int64_t parse_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: invalid integer for key '" + key + "': " + s);
    }
}

}  // namespace

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string matrix_to_string(const SymMat& m) {
    // scalar multiples of the identity print as a single number
    bool scalar = true;
    for (int i = 0; i < m.dim && scalar; ++i)
        for (int j = 0; j < m.dim; ++j)
            if (std::abs(m(i, j) - (i == j ? m(0, 0) : 0.0)) > 0) scalar = false;
    if (scalar) return fmt_double(m(0, 0));
    std::string out;
    for (int i = 0; i < m.dim; ++i) {
        if (i) out += ";";
        for (int j = 0; j < m.dim; ++j) {
            if (j) out += ",";
            out += fmt_double(m(i, j));
        }
    }
    return out;
}

SymMat matrix_from_string(const std::string& s, int dim) {
    SymMat m(dim);
    if (s.find(';') == std::string::npos && s.find(',') == std::string::npos) {
        double v = parse_double(s, "matrix");
        for (int i = 0; i < dim; ++i) m(i, i) = v;
        return m;
    }
    std::istringstream rows(s);
    std::string row;
    int i = 0;
    while (std::getline(rows, row, ';')) {
        if (i >= dim) throw std::invalid_argument("config: matrix has too many rows: " + s);
        std::istringstream cols(row);
        std::string cell;
        int j = 0;
        while (std::getline(cols, cell, ',')) {
            if (j >= dim) throw std::invalid_argument("config: matrix has too many columns: " + s);
            m(i, j) = parse_double(cell, "matrix");
            ++j;
        }
        if (j != dim) throw std::invalid_argument("config: matrix row too short: " + s);
        ++i;
    }
    if (i != dim) throw std::invalid_argument("config: matrix needs " + std::to_string(dim) + " rows: " + s);
    return m;
}

std::string serialize_field_spec(const FieldSpec& spec) {
    std::ostringstream os;
    os << "dim " << spec.dim << "\n";
    os << "lambda " << fmt_double(spec.lambda) << "\n";
    os << "law " << spec.law_name() << "\n";
    switch (spec.kind) {
        case LawKind::Constant:
            os << "matrix " << matrix_to_string(spec.constant.value) << "\n";
            break;
        case LawKind::Checkerboard: {
            os << "values";
            for (const auto& v : spec.checkerboard.values) os << " " << matrix_to_string(v);
            os << "\n";
            os << "probs";
            for (double p : spec.checkerboard.probs) os << " " << fmt_double(p);
            os << "\n";
            break;
        }
        case LawKind::PoissonInclusions:
            os << "intensity " << fmt_double(spec.poisson.intensity) << "\n";
            os << "radius " << fmt_double(spec.poisson.radius_min) << " "
               << fmt_double(spec.poisson.radius_max) << "\n";
            os << "inside " << matrix_to_string(spec.poisson.inside) << "\n";
            os << "outside " << matrix_to_string(spec.poisson.outside) << "\n";
            break;
        case LawKind::MollifiedWhiteNoise:
            os << "kernel_radius " << fmt_double(spec.mollified.kernel_radius) << "\n";
            os << "noise_res " << spec.mollified.noise_res << "\n";
            os << "map_scale " << fmt_double(spec.mollified.map_scale) << "\n";
            break;
        case LawKind::Layered1D: {
            os << "values";
            for (double v : spec.layered.values) os << " " << fmt_double(v);
            os << "\n";
            os << "probs";
            for (double p : spec.layered.probs) os << " " << fmt_double(p);
            os << "\n";
            break;
        }
    }
    return os.str();
}

namespace {

const std::set<std::string>& field_keys() {
    static std::set<std::string> keys = {"dim",       "lambda", "law",       "matrix",
                                         "values",    "probs",  "intensity", "radius",
                                         "inside",    "outside", "kernel_radius",
                                         "noise_res", "map_scale"};
    return keys;
}

const std::set<std::string>& experiment_keys() {
    static std::set<std::string> keys = {"grid_k", "level",   "levels",    "eps",
                                         "samples", "seed",    "tol",       "max_iter",
                                         "out",     "elements", "quadrature"};
    return keys;
}

}  // namespace

FieldSpec parse_field_spec(const std::string& text) {
    FieldSpec spec;
    std::map<std::string, std::vector<std::string>> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        std::string key = toks.front();
        if (!field_keys().count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        kv[key] = std::vector<std::string>(toks.begin() + 1, toks.end());
    }
    auto get1 = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.size() != 1)
            throw std::invalid_argument("config: key '" + key + "' needs exactly one value");
        return it->second.front();
    };
    if (kv.count("dim")) spec.dim = static_cast<int>(parse_int(get1("dim"), "dim"));
    if (kv.count("lambda")) spec.lambda = parse_double(get1("lambda"), "lambda");
    std::string law = kv.count("law") ? get1("law") : "constant";
    if (law == "constant") {
        spec.kind = LawKind::Constant;
        spec.constant.value = kv.count("matrix")
                                  ? matrix_from_string(get1("matrix"), spec.dim)
                                  : SymMat::identity(spec.dim);
    } else if (law == "checkerboard") {
        spec.kind = LawKind::Checkerboard;
        if (!kv.count("values") || !kv.count("probs"))
            throw std::invalid_argument("config: checkerboard needs 'values' and 'probs'");
        for (const auto& v : kv["values"])
            spec.checkerboard.values.push_back(matrix_from_string(v, spec.dim));
        for (const auto& p : kv["probs"])
            spec.checkerboard.probs.push_back(parse_double(p, "probs"));
    } else if (law == "poisson") {
        spec.kind = LawKind::PoissonInclusions;
        spec.poisson.intensity = parse_double(get1("intensity"), "intensity");
        if (kv.count("radius")) {
            const auto& r = kv["radius"];
            if (r.size() == 1) {
                spec.poisson.radius_min = spec.poisson.radius_max = parse_double(r[0], "radius");
            } else if (r.size() == 2) {
                spec.poisson.radius_min = parse_double(r[0], "radius");
                spec.poisson.radius_max = parse_double(r[1], "radius");
            } else {
                throw std::invalid_argument("config: radius takes one or two values");
            }
        }
        if (kv.count("inside")) spec.poisson.inside = matrix_from_string(get1("inside"), spec.dim);
        if (kv.count("outside"))
            spec.poisson.outside = matrix_from_string(get1("outside"), spec.dim);
    } else if (law == "mollified") {
        spec.kind = LawKind::MollifiedWhiteNoise;
        if (kv.count("kernel_radius"))
            spec.mollified.kernel_radius = parse_double(get1("kernel_radius"), "kernel_radius");
        if (kv.count("noise_res"))
            spec.mollified.noise_res = static_cast<int>(parse_int(get1("noise_res"), "noise_res"));
        if (kv.count("map_scale"))
            spec.mollified.map_scale = parse_double(get1("map_scale"), "map_scale");
    } else if (law == "layered") {
        spec.kind = LawKind::Layered1D;
        if (!kv.count("values") || !kv.count("probs"))
            throw std::invalid_argument("config: layered needs 'values' and 'probs'");
        for (const auto& v : kv["values"])
            spec.layered.values.push_back(parse_double(v, "values"));
        for (const auto& p : kv["probs"])
            spec.layered.probs.push_back(parse_double(p, "probs"));
    } else {
        throw std::invalid_argument("config: unknown law '" + law + "'");
    }
    spec.validate();
    return spec;
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << serialize_field_spec(field);
    os << "grid_k " << grid_k << "\n";
    os << "level " << level << "\n";
    if (!levels.empty()) {
        os << "levels";
        for (int l : levels) os << " " << l;
        os << "\n";
    }
    if (!eps.empty()) {
        os << "eps";
        for (double e : eps) os << " " << fmt_double(e);
        os << "\n";
    }
    os << "samples " << samples << "\n";
    os << "seed " << seed << "\n";
    os << "tol " << fmt_double(tol) << "\n";
    if (max_iter > 0) os << "max_iter " << max_iter << "\n";
    os << "out " << out_dir << "\n";
    return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::string field_lines, exp_lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::string stripped = line;
        auto hash = stripped.find('#');
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        auto toks = tokenize(stripped);
        if (toks.empty()) continue;
        if (field_keys().count(toks.front()))
            field_lines += stripped + "\n";
        else if (experiment_keys().count(toks.front()))
            exp_lines += stripped + "\n";
        else
            throw std::invalid_argument("config: unknown key '" + toks.front() + "'");
    }
    cfg.field = parse_field_spec(field_lines);
    std::istringstream es(exp_lines);
    while (std::getline(es, line)) {
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& key = toks.front();
        std::vector<std::string> vals(toks.begin() + 1, toks.end());
        auto need1 = [&]() -> const std::string& {
            if (vals.size() != 1)
                throw std::invalid_argument("config: key '" + key + "' needs exactly one value");
            return vals.front();
        };
        if (key == "grid_k") cfg.grid_k = static_cast<int>(parse_int(need1(), key));
        else if (key == "level") cfg.level = static_cast<int>(parse_int(need1(), key));
        else if (key == "levels") {
            for (const auto& v : vals) cfg.levels.push_back(static_cast<int>(parse_int(v, key)));
        } else if (key == "eps") {
            for (const auto& v : vals) {
                // accept "1/27" fractions
                auto slash = v.find('/');
                if (slash != std::string::npos) {
                    double num = parse_double(v.substr(0, slash), key);
                    double den = parse_double(v.substr(slash + 1), key);
                    cfg.eps.push_back(num / den);
                } else {
                    cfg.eps.push_back(parse_double(v, key));
                }
            }
        } else if (key == "samples") cfg.samples = static_cast<int>(parse_int(need1(), key));
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(need1(), key));
        else if (key == "tol") cfg.tol = parse_double(need1(), key);
        else if (key == "max_iter") cfg.max_iter = static_cast<int>(parse_int(need1(), key));
        else if (key == "out") cfg.out_dir = need1();
        else if (key == "elements") {
            if (need1() != "q1")
                throw std::invalid_argument("config: only 'elements q1' is supported");
        } else if (key == "quadrature") {
            if (need1() != "exact")
                throw std::invalid_argument("config: only 'quadrature exact' is supported");
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ExperimentConfig::hash() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(serialize()));
    return buf;
}

std::string field_spec_hash(const FieldSpec& spec) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(serialize_field_spec(spec)));
    return buf;
}

}  // namespace homolab
