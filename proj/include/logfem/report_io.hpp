#pragma once

// CSV / JSON / SVG serialization of study reports. Numbers are written with
// 17 significant digits so emitted files parse back to identical doubles.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "logfem/study.hpp"

namespace logfem {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ErrorRecord, N, h, E, s, r, residual, E_mid, arg_i, arg_j, arg_k)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GreenRecord, N, G_centre, residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeparabilityRecord, N, q, exact_discrepancy, residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Lemma3Record, N, max_err, ratio, arg_i, arg_j, iterm, iterm_ratio,
                                   green_identity_defect, barrier_excess)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LinearFit, a, b, max_rel_residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Provenance, timestamp, config_hash, quadrature)

inline void to_json(nlohmann::json& j, const StudyReport& r) {
    j = nlohmann::json{{"schema_version", r.schema_version},
                       {"study", r.study},
                       {"manufactured", r.manufactured},
                       {"weight", r.weight},
                       {"load", r.load},
                       {"solver", r.solver},
                       {"tol", r.tol},
                       {"records", r.records},
                       {"green", r.green},
                       {"separability", r.separability},
                       {"lemma3", r.lemma3},
                       {"provenance", r.provenance}};
    j["fit"] = r.fit ? nlohmann::json(*r.fit) : nlohmann::json(nullptr);
    j["fit_drop_smallest"] = r.fit_drop_smallest ? nlohmann::json(*r.fit_drop_smallest) : nlohmann::json(nullptr);
    j["c_star_estimate"] = r.c_star_estimate ? nlohmann::json(*r.c_star_estimate) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, StudyReport& r) {
    j.at("schema_version").get_to(r.schema_version);
    if (r.schema_version != kReportSchemaVersion)
        throw std::runtime_error("report: unsupported schema_version " + std::to_string(r.schema_version));
    j.at("study").get_to(r.study);
    j.at("manufactured").get_to(r.manufactured);
    j.at("weight").get_to(r.weight);
    j.at("load").get_to(r.load);
    j.at("solver").get_to(r.solver);
    j.at("tol").get_to(r.tol);
    j.at("records").get_to(r.records);
    j.at("green").get_to(r.green);
    j.at("separability").get_to(r.separability);
    j.at("lemma3").get_to(r.lemma3);
    j.at("provenance").get_to(r.provenance);
    auto opt = [&](const char* key, auto& out) {
        using T = typename std::decay_t<decltype(out)>::value_type;
        if (j.contains(key) && !j.at(key).is_null())
            out = j.at(key).get<T>();
        else
            out.reset();
    };
    opt("fit", r.fit);
    opt("fit_drop_smallest", r.fit_drop_smallest);
    opt("c_star_estimate", r.c_star_estimate);
}

inline void write_json(std::ostream& os, const StudyReport& r) {
    nlohmann::json j = r;
    os << j.dump(2) << '\n';
}

inline StudyReport read_json(std::istream& is) { return nlohmann::json::parse(is).get<StudyReport>(); }

// ---------------------------------------------------------------------------
// CSV: the record table matching the report's study kind. Error studies use
// N,h,E,s,r,residual followed by E_mid and the argmax node.

inline std::vector<std::string> csv_columns(const StudyReport& r) {
    if (r.study == "green") return {"N", "G_centre", "residual"};
    if (r.study == "separability") return {"N", "q", "exact_discrepancy", "residual"};
    if (r.study == "lemma3")
        return {"N", "max_err", "ratio", "arg_i", "arg_j", "iterm", "iterm_ratio", "green_identity_defect",
                "barrier_excess"};
    return {"N", "h", "E", "s", "r", "residual", "E_mid", "arg_i", "arg_j", "arg_k"};
}

inline void write_csv(std::ostream& os, const StudyReport& r) {
    const auto cols = csv_columns(r);
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << '\n';
    auto row = [&](std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& s : cells) {
            os << (first ? "" : ",") << s;
            first = false;
        }
        os << '\n';
    };
    auto I = [](int v) { return std::to_string(v); };
    if (r.study == "green") {
        for (const auto& g : r.green) row({I(g.N), fmt17(g.G_centre), fmt17(g.residual)});
    } else if (r.study == "separability") {
        for (const auto& s : r.separability) row({I(s.N), fmt17(s.q), fmt17(s.exact_discrepancy), fmt17(s.residual)});
    } else if (r.study == "lemma3") {
        for (const auto& l : r.lemma3)
            row({I(l.N), fmt17(l.max_err), fmt17(l.ratio), I(l.arg_i), I(l.arg_j), fmt17(l.iterm),
                 fmt17(l.iterm_ratio), fmt17(l.green_identity_defect), fmt17(l.barrier_excess)});
    } else {
        for (const auto& e : r.records)
            row({I(e.N), fmt17(e.h), fmt17(e.E), fmt17(e.s), fmt17(e.r), fmt17(e.residual), fmt17(e.E_mid),
                 I(e.arg_i), I(e.arg_j), I(e.arg_k)});
    }
}

/// Parse a CSV written by write_csv back into the record table of `into`
/// (whose `study` field selects the schema).
inline void read_csv(std::istream& is, StudyReport& into) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header != csv_columns(into)) throw std::runtime_error("csv: header does not match study '" + into.study + "'");
    into.records.clear();
    into.green.clear();
    into.separability.clear();
    into.lemma3.clear();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != header.size()) throw std::runtime_error("csv: row has wrong column count");
        auto I = [](double d) { return static_cast<int>(d); };
        if (into.study == "green") {
            into.green.push_back({I(v[0]), v[1], v[2]});
        } else if (into.study == "separability") {
            into.separability.push_back({I(v[0]), v[1], v[2], v[3]});
        } else if (into.study == "lemma3") {
            Lemma3Record l;
            l.N = I(v[0]), l.max_err = v[1], l.ratio = v[2], l.arg_i = I(v[3]), l.arg_j = I(v[4]);
            l.iterm = v[5], l.iterm_ratio = v[6], l.green_identity_defect = v[7], l.barrier_excess = v[8];
            into.lemma3.push_back(l);
        } else {
            ErrorRecord e;
            e.N = I(v[0]), e.h = v[1], e.E = v[2], e.s = v[3], e.r = v[4], e.residual = v[5], e.E_mid = v[6];
            e.arg_i = I(v[7]), e.arg_j = I(v[8]), e.arg_k = I(v[9]);
            into.records.push_back(e);
        }
    }
}

// ---------------------------------------------------------------------------
// SVG: the normalized quantity (s_N, or G_centre for the Green study) against
// ln N, with the fitted line when present.

inline void write_svg(std::ostream& os, const StudyReport& r) {
    std::vector<double> xs, ys;
    std::string ylabel = "E_N / h^2";
    if (r.study == "green") {
        ylabel = "G(N/2,N/2)";
        for (const auto& g : r.green) xs.push_back(std::log(g.N)), ys.push_back(g.G_centre);
    } else if (r.study == "separability") {
        ylabel = "q_N";
        for (const auto& s : r.separability) xs.push_back(std::log(s.N)), ys.push_back(s.q);
    } else if (r.study == "lemma3") {
        ylabel = "max|w-W| / (h^2 ln N)";
        for (const auto& l : r.lemma3) xs.push_back(std::log(l.N)), ys.push_back(l.ratio);
    } else {
        for (const auto& e : r.records) xs.push_back(std::log(e.N)), ys.push_back(e.s);
    }
    const double W = 640, H = 420, L = 70, R = 20, T = 30, B = 50;
    if (xs.empty()) {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\"/>\n";
        return;
    }
    double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
    double y0 = std::min(0.0, *std::min_element(ys.begin(), ys.end()));
    double y1 = *std::max_element(ys.begin(), ys.end());
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    y1 += 0.05 * (y1 - y0);
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double yv = y0 + t * (y1 - y0) / 4;
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt17(yv).substr(0, 6)
           << "</text>\n";
    }
    for (std::size_t a = 0; a < xs.size(); ++a)
        os << "<text x=\"" << px(xs[a]) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">N="
           << static_cast<int>(std::lround(std::exp(xs[a]))) << "</text>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">ln N</text>\n";
    os << "<text x=\"14\" y=\"" << T - 10 << "\">" << ylabel << " (" << r.study << ")</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t a = 0; a < xs.size(); ++a) os << px(xs[a]) << ',' << py(ys[a]) << ' ';
    os << "\"/>\n";
    for (std::size_t a = 0; a < xs.size(); ++a)
        os << "<circle cx=\"" << px(xs[a]) << "\" cy=\"" << py(ys[a]) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    if (r.fit && r.study != "separability" && r.study != "lemma3") {
        os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(r.fit->a * x0 + r.fit->b) << "\" x2=\"" << px(x1)
           << "\" y2=\"" << py(r.fit->a * x1 + r.fit->b) << "\" stroke=\"#d62728\" stroke-dasharray=\"5,4\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace logfem
