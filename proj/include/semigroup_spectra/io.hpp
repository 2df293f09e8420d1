#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "geometry.hpp"
#include "laplace.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "spectra.hpp"

namespace sgs {

using json = nlohmann::json;

namespace detail {

// Atlas files store reals as %.17g decimal strings so a save/load round trip
// reproduces the double bit pattern on any platform.
inline std::string real_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double real_of(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string& s = j.get_ref<const std::string&>();
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw input_error(std::string("bad real in ") + what + ": '" + s + "'");
        }
        if (pos != s.size()) throw input_error(std::string("bad real in ") + what + ": '" + s + "'");
        return v;
    }
    throw input_error(std::string("expected a real in ") + what);
}

// Reports round all reals to 12 significant digits before serialization, so
// byte-identical output does not depend on shortest-representation quirks of
// the last bits.
inline json fixed_real(double v) {
    if (!std::isfinite(v)) return json(real_str(v));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return json(std::stod(buf));
}

inline json real_pair(cplx z) { return json::array({fixed_real(z.real()), fixed_real(z.imag())}); }

inline json poly_strs(const Polynomial& p) {
    json a = json::array();
    for (double c : p.coeffs()) a.push_back(real_str(c));
    if (a.empty()) a.push_back("0");
    return a;
}

inline Polynomial poly_of(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw input_error(std::string(what) + " must be a coefficient array");
    std::vector<double> c;
    for (const auto& e : j) c.push_back(real_of(e, what));
    return Polynomial{c};
}

inline json interval_strs(const Interval& iv) {
    return json::array({real_str(iv.lo), real_str(iv.hi)});
}

inline Interval interval_of(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw input_error(std::string(what) + " must be [lo, hi]");
    return {real_of(j[0], what), real_of(j[1], what)};
}

inline json rect_strs(const Rect& r) {
    return json{{"x", interval_strs(r.x)}, {"y", interval_strs(r.y)}};
}

inline Rect rect_of(const json& j, const char* what) {
    if (!j.is_object()) throw input_error(std::string(what) + " must be {x, y}");
    return {interval_of(j.at("x"), what), interval_of(j.at("y"), what)};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("cannot parse " + path + ": " + e.what());
    }
    return j;
}

inline void save_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << text;
    if (!out) throw input_error("write failed on " + path);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Atlas files.

inline json atlas_to_json(const BranchedSurfaceAtlas& atlas) {
    using namespace detail;
    json charts = json::array();
    for (const auto& c : atlas.charts) charts.push_back({{"id", c.id}, {"ball", rect_strs(c.ball)}});
    json subs = json::array();
    for (const auto& s : atlas.subcharts) {
        json image = json::array();
        for (const auto& r : s.image) image.push_back(rect_strs(r));
        subs.push_back({{"id", s.id}, {"parent_chart", s.parent_chart}, {"image", image}});
    }
    json trans = json::array();
    for (const auto& t : atlas.transitions) {
        json xm{{"kind", t.x_map.kind == MapDescriptor1D::Poly ? "poly" : "poly_inverse"},
                {"coeffs", poly_strs(t.x_map.p)}};
        if (t.x_map.kind == MapDescriptor1D::PolyInverse)
            xm["inv_interval"] = interval_strs(t.x_map.inv_interval);
        trans.push_back({{"from_chart", t.from_chart},
                         {"to_chart", t.to_chart},
                         {"from_sheet", t.from_sheet},
                         {"to_sheet", t.to_sheet},
                         {"domain", rect_strs(t.domain)},
                         {"x_map", xm},
                         {"y_a", poly_strs(t.y_a)},
                         {"y_b", poly_strs(t.y_b)}});
    }
    json fol{{"delta", real_str(atlas.foliation.delta)},
             {"leaf_axis", std::string(1, atlas.foliation.leaf_axis)},
             {"orientation", atlas.foliation.orientation}};
    return json{{"charts", charts},
                {"subcharts", subs},
                {"transitions", trans},
                {"foliation", fol},
                {"classify_radius", real_str(atlas.classify_radius)}};
}

inline BranchedSurfaceAtlas atlas_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw input_error("atlas document must be a JSON object");
    BranchedSurfaceAtlas atlas;
    for (const auto& c : j.value("charts", json::array()))
        atlas.charts.push_back({c.at("id").get<int>(), rect_of(c.at("ball"), "chart ball")});
    for (const auto& s : j.value("subcharts", json::array())) {
        Subchart sc;
        sc.id = s.at("id").get<int>();
        sc.parent_chart = s.at("parent_chart").get<int>();
        for (const auto& r : s.at("image")) sc.image.push_back(rect_of(r, "subchart image"));
        atlas.subcharts.push_back(std::move(sc));
    }
    for (const auto& t : j.value("transitions", json::array())) {
        TransitionMap tm;
        tm.from_chart = t.at("from_chart").get<int>();
        tm.to_chart = t.at("to_chart").get<int>();
        tm.from_sheet = t.at("from_sheet").get<int>();
        tm.to_sheet = t.at("to_sheet").get<int>();
        tm.domain = rect_of(t.at("domain"), "transition domain");
        const json& xm = t.at("x_map");
        std::string kind = xm.at("kind").get<std::string>();
        if (kind == "poly")
            tm.x_map.kind = MapDescriptor1D::Poly;
        else if (kind == "poly_inverse")
            tm.x_map.kind = MapDescriptor1D::PolyInverse;
        else
            throw input_error("unknown x_map kind '" + kind + "'");
        tm.x_map.p = poly_of(xm.at("coeffs"), "x_map coeffs");
        if (tm.x_map.kind == MapDescriptor1D::PolyInverse)
            tm.x_map.inv_interval = interval_of(xm.at("inv_interval"), "x_map inv_interval");
        tm.y_a = poly_of(t.at("y_a"), "y_a");
        tm.y_b = poly_of(t.at("y_b"), "y_b");
        atlas.transitions.push_back(std::move(tm));
    }
    if (j.contains("foliation")) {
        const json& f = j.at("foliation");
        atlas.foliation.delta = real_of(f.at("delta"), "foliation delta");
        std::string ax = f.value("leaf_axis", std::string("y"));
        if (ax.size() != 1 || (ax[0] != 'x' && ax[0] != 'y'))
            throw input_error("foliation leaf_axis must be 'x' or 'y'");
        atlas.foliation.leaf_axis = ax[0];
        atlas.foliation.orientation = f.value("orientation", std::vector<int>{});
    }
    if (j.contains("classify_radius"))
        atlas.classify_radius = real_of(j.at("classify_radius"), "classify_radius");
    return atlas;
}

inline void save_atlas(const std::string& path, const BranchedSurfaceAtlas& atlas) {
    detail::save_text_file(path, atlas_to_json(atlas).dump(2) + "\n");
}

inline BranchedSurfaceAtlas load_atlas(const std::string& path) {
    return atlas_from_json(detail::load_json_file(path));
}

// ---------------------------------------------------------------------------
// Model files: base.branches[], roof.pieces[], lambda_target, delta.

inline json model_to_json(const SuspensionModel& m) {
    using namespace detail;
    json branches = json::array();
    for (const auto& b : m.base().branches())
        branches.push_back(
            {{"interval", interval_strs(b.interval)}, {"poly_coeffs", poly_strs(b.map)}});
    json pieces = json::array();
    for (const auto& p : m.roof().pieces())
        pieces.push_back(
            {{"interval", interval_strs(p.interval)}, {"poly_coeffs", poly_strs(p.poly)}});
    return json{{"base", {{"branches", branches}}},
                {"roof", {{"pieces", pieces}}},
                {"lambda_target", real_str(m.lambda_target())},
                {"delta", real_str(m.delta())}};
}

inline SuspensionModel model_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw input_error("model document must be a JSON object");
    if (!j.contains("base") || !j.at("base").contains("branches"))
        throw input_error("model needs base.branches");
    if (!j.contains("roof") || !j.at("roof").contains("pieces"))
        throw input_error("model needs roof.pieces");
    std::vector<Branch> branches;
    for (const auto& b : j.at("base").at("branches"))
        branches.push_back({interval_of(b.at("interval"), "branch interval"),
                            poly_of(b.at("poly_coeffs"), "branch poly"), b.value("full", true)});
    std::vector<RoofPiece> pieces;
    for (const auto& p : j.at("roof").at("pieces"))
        pieces.push_back({interval_of(p.at("interval"), "roof interval"),
                          poly_of(p.at("poly_coeffs"), "roof poly")});
    double lambda_target = real_of(j.at("lambda_target"), "lambda_target");
    double delta = real_of(j.at("delta"), "delta");
    return SuspensionModel(BranchedMap1D(branches), RoofFunction(pieces), lambda_target, delta);
}

inline SuspensionModel load_model(const std::string& path) {
    return model_from_json(detail::load_json_file(path));
}

inline void save_model(const std::string& path, const SuspensionModel& m) {
    detail::save_text_file(path, model_to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Measures: CSV with header cell_index,re,im.

inline void save_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
    std::ostringstream out;
    out << "cell_index,re,im\n";
    char buf[96];
    for (std::size_t i = 0; i < mu.coeffs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, mu.coeffs[i].real(),
                      mu.coeffs[i].imag());
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

inline DiscreteMeasure load_measure_csv(const std::string& path, const std::string& basis_tag) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("cell_index,re,im", 0) != 0)
        throw input_error(path + " is not a measure file (missing header)");
    DiscreteMeasure mu{basis_tag, {}};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t idx;
        double re, im;
        if (std::sscanf(line.c_str(), "%zu,%lg,%lg", &idx, &re, &im) != 3)
            throw input_error(path + ": bad measure row '" + line + "'");
        if (idx != mu.coeffs.size()) throw input_error(path + ": cell indices must be consecutive");
        mu.coeffs.emplace_back(re, im);
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Matrices: binary row-major complex doubles behind an 8-byte dimension
// header, with a JSON sidecar (<path>.json) naming provenance and grid.

inline void save_matrix(const std::string& path, const OperatorMatrix& op) {
    int n = op.mat.rows();
    if (op.mat.cols() != n) throw input_error("matrix files hold square matrices");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    std::uint64_t dim = std::uint64_t(n);
    out.write(reinterpret_cast<const char*>(&dim), 8);
    std::vector<double> row(2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            row[2 * j] = op.mat(i, j).real();
            row[2 * j + 1] = op.mat(i, j).imag();
        }
        out.write(reinterpret_cast<const char*>(row.data()), 16 * std::size_t(n));
    }
    if (!out) throw input_error("write failed on " + path);

    json params = json::object();
    for (const auto& [k, v] : op.prov.params) params[k] = detail::fixed_real(v);
    json side{{"kind", op.prov.kind}, {"params", params}, {"basis_tag", op.basis_tag}, {"dim", n}};
    detail::save_text_file(path + ".json", side.dump(2) + "\n");
}

inline OperatorMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    std::uint64_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 8);
    if (!in || dim == 0 || dim > (1u << 20)) throw input_error(path + ": bad matrix header");
    int n = int(dim);
    OperatorMatrix op{ComplexMatrix(n, n), {"file", {}}, ""};
    std::vector<double> row(2 * n);
    for (int i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), 16 * std::size_t(n));
        if (!in) throw input_error(path + ": truncated matrix payload");
        for (int j = 0; j < n; ++j) op.mat(i, j) = cplx(row[2 * j], row[2 * j + 1]);
    }
    std::ifstream side_in(path + ".json");
    if (side_in) {
        json side;
        try {
            side_in >> side;
            op.prov.kind = side.value("kind", std::string("file"));
            op.basis_tag = side.value("basis_tag", std::string());
            if (side.contains("params"))
                for (const auto& [k, v] : side.at("params").items())
                    op.prov.params[k] = detail::real_of(v, "matrix sidecar param");
        } catch (const json::exception& e) {
            throw input_error(path + ".json: " + e.what());
        }
    }
    return op;
}

// ---------------------------------------------------------------------------
// Report pieces.

inline json validation_report_to_json(const ValidationReport& rep) {
    json axioms = json::array();
    for (const auto& a : rep.axioms) {
        json e{{"axiom", a.axiom}, {"pass", a.pass}};
        if (a.witness) {
            e["witness"] = {{"chart", a.witness->chart},
                            {"subchart", a.witness->subchart},
                            {"x", detail::fixed_real(a.witness->x)},
                            {"y", detail::fixed_real(a.witness->y)},
                            {"note", a.witness->note}};
        }
        axioms.push_back(e);
    }
    return json{{"pass", rep.pass()},
                {"structurally_ok", rep.structurally_ok()},
                {"orientation_consistent", rep.orientation_consistent},
                {"structural_errors", rep.structural_errors},
                {"axioms", axioms}};
}

inline json expansion_report_to_json(const ExpansionReport& rep) {
    return json{{"lambda_hat", detail::fixed_real(rep.lambda_hat)},
                {"c_hat", detail::fixed_real(rep.c_hat)},
                {"sup_b", detail::fixed_real(rep.sup_b)},
                {"pass", rep.pass},
                {"invalid_samples", rep.invalid_samples}};
}

inline json pole_to_json(const PoleRecord& p) {
    return json{{"re", detail::fixed_real(p.location.real())},
                {"im", detail::fixed_real(p.location.imag())},
                {"order", p.order},
                {"rank", p.rank},
                {"strength", detail::fixed_real(p.strength)}};
}

inline json spectral_report_to_json(const SpectralReport& rep) {
    using namespace detail;
    json transfer = json::array(), resolvent = json::array(), poles = json::array(),
         axis = json::array();
    for (const auto& e : rep.transfer_leading)
        transfer.push_back({{"value", real_pair(e)}, {"modulus", fixed_real(std::abs(e))}});
    for (const auto& v : rep.resolvent_leading)
        resolvent.push_back({{"value", real_pair(v)}, {"modulus", fixed_real(std::abs(v))}});
    for (const auto& p : rep.poles) poles.push_back(pole_to_json(p));
    for (const auto& p : rep.axis_poles) axis.push_back(real_pair(p));
    json j{{"model", rep.model_name},
           {"basis_tag", rep.basis_tag},
           {"n_cells", rep.n_cells},
           {"t_probe", fixed_real(rep.t_probe)},
           {"z_ref", real_pair(rep.z_ref)},
           {"strip",
            {{"re_min", fixed_real(rep.strip.re_min)},
             {"re_max", fixed_real(rep.strip.re_max)},
             {"im_max", fixed_real(rep.strip.im_max)}}},
           {"axis_band", fixed_real(rep.axis_band)},
           {"transfer_leading", transfer},
           {"resolvent_leading", resolvent},
           {"poles", poles},
           {"invariant_drift", fixed_real(rep.invariant_drift)},
           {"zero_pole", real_pair(rep.zero_pole)},
           {"zero_pole_gap", fixed_real(rep.zero_pole_gap)},
           {"axis_poles", axis},
           {"mixing", rep.mixing},
           {"projector_rank", rep.projector_rank},
           {"projector_defect", fixed_real(rep.projector_defect)},
           {"zero_simple", rep.zero_simple}};
    return j;
}

inline json inversion_step_to_json(const InversionStep& s, double a, double t) {
    return json{{"t", detail::fixed_real(t)},
                {"a", detail::fixed_real(a)},
                {"k", detail::fixed_real(s.k)},
                {"n_nodes", s.nodes_used},
                {"weak_error", detail::fixed_real(s.weak_error)},
                {"tv_error", detail::fixed_real(s.tv_error)},
                {"tail_budget", detail::fixed_real(s.tail_budget)}};
}

// ---------------------------------------------------------------------------
// Plot-ready CSV tables.

inline void save_eigenvalue_csv(const std::string& path, const std::vector<EigenPair>& eigs) {
    std::ostringstream out;
    out << "re,im,modulus\n";
    char buf[96];
    for (const auto& e : eigs) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", e.eigenvalue.real(),
                      e.eigenvalue.imag(), std::abs(e.eigenvalue));
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

inline void save_value_csv(const std::string& path, const std::vector<cplx>& values) {
    std::ostringstream out;
    out << "re,im,modulus\n";
    char buf[96];
    for (const auto& v : values) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", v.real(), v.imag(), std::abs(v));
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

inline void save_pole_csv(const std::string& path, const std::vector<PoleRecord>& poles) {
    std::ostringstream out;
    out << "re,im,order,rank,strength\n";
    char buf[128];
    for (const auto& p : poles) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%d,%d,%.12e\n", p.location.real(),
                      p.location.imag(), p.order, p.rank, p.strength);
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

inline void save_heatmap_csv(const std::string& path, const std::vector<HeatSample>& samples) {
    std::ostringstream out;
    out << "re,im,log_norm\n";
    char buf[96];
    for (const auto& h : samples) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", h.re, h.im, h.log_norm);
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

inline void save_ladder_csv(const std::string& path, const std::vector<InversionStep>& steps) {
    std::ostringstream out;
    out << "k,weak_error,tv_error,tail_budget\n";
    char buf[128];
    for (const auto& s : steps) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e\n", s.k, s.weak_error, s.tv_error,
                      s.tail_budget);
        out << buf;
    }
    detail::save_text_file(path, out.str());
}

} // namespace sgs
