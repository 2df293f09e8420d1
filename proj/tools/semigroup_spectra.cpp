// Command line front end for the semigroup_spectra library.
//
// Exit codes:
//   0   success
//   1   a numerical check failed (the failing check is named on stderr)
//   2   model invalid (axiom or expansion failure, or unbuildable model)
//   3   structural atlas error (validate only)
//   64  usage or configuration parse error
//   66  plot-data: missing upstream artifact

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semigroup_spectra/io.hpp"
#include "semigroup_spectra/laplace.hpp"

namespace fs = std::filesystem;
using namespace sgs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitModel = 2;
constexpr int kExitStructural = 3;
constexpr int kExitUsage = 64;
constexpr int kExitArtifact = 66;

// Model files that parse as JSON but do not define a usable model get their
// own exit code, distinct from unreadable/ill-formed input.
struct model_invalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SuspensionModel load_model_cli(const std::string& path) {
    json j = detail::load_json_file(path);
    try {
        return model_from_json(j);
    } catch (const std::exception& e) {
        throw model_invalid(std::string(e.what()));
    }
}

std::pair<int, int> parse_grid(const std::string& s) {
    int nx = 0, ny = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%d,%d%c", &nx, &ny, &extra) != 2 || nx < 1 || ny < 1)
        throw input_error("grid must be 'nx,ny' with positive integers, got '" + s + "'");
    return {nx, ny};
}

cplx parse_complex(const std::string& s) {
    double re = 0, im = 0;
    char extra = 0;
    int n = std::sscanf(s.c_str(), "%lf,%lf%c", &re, &im, &extra);
    if (n == 2) return {re, im};
    if (std::sscanf(s.c_str(), "%lf%c", &re, &extra) == 1) return {re, 0.0};
    throw input_error("complex value must be 're,im' or 're', got '" + s + "'");
}

Strip parse_strip(const std::string& s) {
    Strip st;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &st.re_min, &st.re_max, &st.im_max, &extra) != 3)
        throw input_error("strip must be 're_min,re_max,im_max', got '" + s + "'");
    return st;
}

void write_json_file(const fs::path& path, const json& j) {
    detail::save_text_file(path.string(), j.dump(2) + "\n");
}

// Shared assembled state for commands that need the model on a grid.
struct Ctx {
    SuspensionModel model;
    CellBasis basis;
    std::string model_path;
    int nx;
    int ny_base;
    int q;
};

Ctx make_ctx(const std::string& model_path, const std::string& grid, int q) {
    auto [nx, ny] = parse_grid(grid);
    SuspensionModel m = load_model_cli(model_path);
    CellBasis basis = CellBasis::build(m, nx, ny);
    return Ctx{std::move(m), std::move(basis), model_path, nx, ny, q};
}

// Generator-backed machinery is expensive to build, so `run` shares one copy
// across tasks.
struct RunState {
    std::optional<GeneratorMatrix> gen;
    std::optional<ResolventEvaluator> ev;
    std::optional<WeakNorm> wn;
};

const ResolventEvaluator& need_evaluator(const Ctx& ctx, RunState& st) {
    if (!st.ev) {
        if (!st.gen) st.gen = build_generator(ctx.model, ctx.basis);
        st.ev = ResolventEvaluator::build(*st.gen);
    }
    return *st.ev;
}

const WeakNorm& need_weak_norm(const Ctx& ctx, RunState& st) {
    if (!st.wn) st.wn = WeakNorm::build(ctx.model, ctx.basis);
    return *st.wn;
}

double tol_of(const std::map<std::string, double>& tol, const std::string& key, double fallback) {
    auto it = tol.find(key);
    return it == tol.end() ? fallback : it->second;
}

// ---- task handlers (used by both the standalone subcommands and `run`) ----

json task_validate(const Ctx& ctx, const json& params, const fs::path& out) {
    int n_samples = params.value("n_samples", 200);
    ValidationReport vr = validate_atlas(ctx.model.atlas());
    ExpansionReport er = verify_expansion(ctx.model, n_samples, {1.0, 2.0, 3.0, 4.0});
    json j{{"validation", validation_report_to_json(vr)},
           {"expansion", expansion_report_to_json(er)}};
    write_json_file(out / "validate.json", j);
    if (!vr.structurally_ok())
        throw model_invalid("atlas structural check failed: " +
                            (vr.structural_errors.empty() ? std::string("see validate.json")
                                                          : vr.structural_errors.front()));
    if (!vr.pass()) throw model_invalid("atlas axiom check failed, see validate.json");
    if (!er.pass)
        throw model_invalid("expansion check failed: lambda_hat = " +
                            detail::real_str(er.lambda_hat) + " vs target " +
                            detail::real_str(ctx.model.lambda_target()));
    return j;
}

json task_spectrum(const Ctx& ctx, const json& params, const fs::path& out,
                   const std::map<std::string, double>& tol) {
    double t = params.value("t", 1.0);
    int k = params.value("k", 8);
    if (t <= 0) throw input_error("spectrum task needs t > 0");
    OperatorMatrix op = assemble_transfer(ctx.model, ctx.basis, t, ctx.q);
    std::vector<EigenPair> eigs = eigen(op, k);
    json rows = json::array();
    for (const auto& e : eigs)
        rows.push_back(json{{"value", detail::real_pair(e.eigenvalue)},
                            {"modulus", detail::fixed_real(std::abs(e.eigenvalue))},
                            {"residual", detail::fixed_real(e.residual)}});
    json j{{"t", detail::fixed_real(t)}, {"n_cells", ctx.basis.n_cells()}, {"values", rows}};
    write_json_file(out / "spectrum.json", j);
    save_eigenvalue_csv((out / "spectrum_eigs.csv").string(), eigs);
    double lead_err = eigs.empty() ? 1.0 : std::abs(eigs.front().eigenvalue - cplx(1.0, 0.0));
    double lead_tol = tol_of(tol, "spectrum_leading", 1e-6);
    if (lead_err > lead_tol)
        throw numeric_error("transfer leading eigenvalue check: |lambda_1 - 1| = " +
                            detail::real_str(lead_err) + " exceeds " + detail::real_str(lead_tol));
    return j;
}

json task_poles(const Ctx& ctx, RunState& st, const json& params, const fs::path& out,
                std::uint64_t seed) {
    Strip strip;
    if (params.contains("strip")) {
        const json& a = params.at("strip");
        if (!a.is_array() || a.size() != 3) throw input_error("poles strip must be [re_min,re_max,im_max]");
        strip.re_min = detail::real_of(a[0], "strip");
        strip.re_max = detail::real_of(a[1], "strip");
        strip.im_max = detail::real_of(a[2], "strip");
    }
    int density = params.value("density", 64);
    int heat_density = params.value("heat_density", 32);
    const ResolventEvaluator& ev = need_evaluator(ctx, st);
    std::vector<PoleRecord> poles = pole_scan(ev, strip, density, 1e-10, seed);
    std::vector<HeatSample> heat = scan_heatmap(ev, strip, heat_density, seed);
    json jp = json::array();
    for (const auto& p : poles) jp.push_back(pole_to_json(p));
    json jh = json::array();
    for (const auto& h : heat)
        jh.push_back(json{{"re", detail::fixed_real(h.re)},
                          {"im", detail::fixed_real(h.im)},
                          {"log_norm", detail::fixed_real(h.log_norm)}});
    json j{{"strip", json::array({detail::fixed_real(strip.re_min), detail::fixed_real(strip.re_max),
                                  detail::fixed_real(strip.im_max)})},
           {"density", density},
           {"heat_density", heat_density},
           {"poles", jp},
           {"heatmap", jh}};
    write_json_file(out / "poles.json", j);
    save_pole_csv((out / "poles.csv").string(), poles);
    save_heatmap_csv((out / "poles_heatmap.csv").string(), heat);
    return j;
}

json task_invariant(const Ctx& ctx, const json& params, const fs::path& out,
                    const std::map<std::string, double>& tol) {
    double t_probe = params.value("t_probe", 1.0);
    double value_tol = tol_of(tol, "invariant_value", 1e-6);
    double cross_tol = tol_of(tol, "invariant_crosscheck", 0.05);
    DiscreteMeasure mu = invariant_measure(ctx.model, ctx.basis, t_probe, value_tol, cross_tol, ctx.q);
    // invariant_measure already enforces its drift bounds; report the residual
    // under an incommensurate time for the record.
    OperatorMatrix op = assemble_transfer(ctx.model, ctx.basis, t_probe * std::sqrt(2.0), ctx.q);
    DiscreteMeasure pushed = apply_matrix(op, mu);
    double drift = 0.0;
    for (std::size_t i = 0; i < mu.coeffs.size(); ++i)
        drift += std::abs(pushed.coeffs[i] - mu.coeffs[i]);
    cplx mass = mass_functional(mu);
    json j{{"t_probe", detail::fixed_real(t_probe)},
           {"mass", detail::real_pair(mass)},
           {"drift", detail::fixed_real(drift)},
           {"n_cells", ctx.basis.n_cells()}};
    write_json_file(out / "invariant.json", j);
    save_measure_csv((out / "invariant.csv").string(), mu);
    return j;
}

json task_projector(const Ctx& ctx, RunState& st, const json& params, const fs::path& out,
                    const std::map<std::string, double>& tol) {
    cplx center{0.0, 0.0};
    if (params.contains("center")) {
        const json& c = params.at("center");
        if (!c.is_array() || c.size() != 2) throw input_error("projector center must be [re,im]");
        center = {detail::real_of(c[0], "center"), detail::real_of(c[1], "center")};
    }
    double radius = params.value("radius", 0.25);
    int nodes = params.value("nodes", 64);
    if (radius <= 0) throw input_error("projector radius must be positive");
    const ResolventEvaluator& ev = need_evaluator(ctx, st);
    OperatorMatrix proj = spectral_projector(ev, center, radius, nodes);
    ComplexMatrix sq = matmul(proj.mat, proj.mat);
    sq -= proj.mat;
    double defect = tv_opnorm(sq);
    int rank = 0;
    if (auto it = proj.prov.params.find("rank"); it != proj.prov.params.end())
        rank = static_cast<int>(std::lround(it->second));
    json j{{"center", detail::real_pair(center)},
           {"radius", detail::fixed_real(radius)},
           {"nodes", nodes},
           {"rank", rank},
           {"idempotency_defect", detail::fixed_real(defect)}};
    write_json_file(out / "projector.json", j);
    save_matrix((out / "projector.bin").string(), proj);
    double defect_tol = tol_of(tol, "projector_defect", 1e-6);
    if (defect > defect_tol)
        throw numeric_error("spectral projector idempotency check: defect = " +
                            detail::real_str(defect) + " exceeds " + detail::real_str(defect_tol));
    return j;
}

json task_invert(const Ctx& ctx, RunState& st, const json& params, const fs::path& out,
                 const std::map<std::string, double>& tol) {
    InversionConfig cfg;
    cfg.t = params.value("t", 1.0);
    cfg.a = params.value("a", 1.0);
    cfg.k = params.value("k", 200.0);
    cfg.n_nodes = params.value("n_nodes", 0);
    bool ladder = params.value("ladder", false);
    if (ladder) {
        cfg.k_ladder.clear();
        for (double kl : {25.0, 50.0, 100.0, 200.0})
            if (kl < cfg.k) cfg.k_ladder.push_back(kl);
        cfg.k_ladder.push_back(cfg.k);
    } else {
        cfg.k_ladder = {cfg.k};
    }
    const ResolventEvaluator& ev = need_evaluator(ctx, st);
    const WeakNorm& wn = need_weak_norm(ctx, st);
    std::vector<InversionStep> steps = bromwich_ladder(ctx.model, ctx.basis, ev, wn, cfg, ctx.q);
    const InversionStep& last = steps.back();
    json j = inversion_step_to_json(last, cfg.a, cfg.t);
    if (ladder) {
        json jl = json::array();
        for (const auto& s : steps) jl.push_back(inversion_step_to_json(s, cfg.a, cfg.t));
        j["ladder"] = jl;
        save_ladder_csv((out / "invert_ladder.csv").string(), steps);
    }
    write_json_file(out / "invert.json", j);
    save_matrix((out / "invert_approximant.bin").string(), last.approximant);
    if (ladder) {
        double slack = tol_of(tol, "ladder_slack", 0.05);
        for (std::size_t i = 1; i < steps.size(); ++i)
            if (steps[i].weak_error > steps[i - 1].weak_error * (1.0 + slack))
                throw numeric_error("inversion ladder check: weak error rose from " +
                                    detail::real_str(steps[i - 1].weak_error) + " to " +
                                    detail::real_str(steps[i].weak_error) + " at k = " +
                                    detail::real_str(steps[i].k));
    }
    return j;
}

json task_report(const Ctx& ctx, const json& params, const fs::path& out, std::uint64_t seed) {
    ReportOptions opts;
    opts.t_probe = params.value("t_probe", opts.t_probe);
    if (params.contains("z_ref")) {
        const json& c = params.at("z_ref");
        if (!c.is_array() || c.size() != 2) throw input_error("report z_ref must be [re,im]");
        opts.z_ref = {detail::real_of(c[0], "z_ref"), detail::real_of(c[1], "z_ref")};
    }
    if (params.contains("strip")) {
        const json& a = params.at("strip");
        if (!a.is_array() || a.size() != 3) throw input_error("report strip must be [re_min,re_max,im_max]");
        opts.strip = Strip{detail::real_of(a[0], "strip"), detail::real_of(a[1], "strip"),
                           detail::real_of(a[2], "strip")};
    }
    opts.k_eigs = params.value("k_eigs", opts.k_eigs);
    opts.density = params.value("density", opts.density);
    opts.q = ctx.q;
    (void)seed;  // the summary uses its own fixed probe stream
    std::string name = fs::path(ctx.model_path).stem().string();
    SpectralReport rep = build_spectral_report(ctx.model, ctx.basis, opts, name);
    json j = spectral_report_to_json(rep);
    write_json_file(out / "spectral.json", j);
    return j;
}

// ---- run orchestration ----

struct TaskSpec {
    std::string name;
    json params = json::object();
};

struct RunConfig {
    std::string model_path;
    int nx = 16;
    int ny = 16;
    std::vector<TaskSpec> tasks;
    std::string output_dir = "run_out";
    std::uint64_t seed = 23;
    std::map<std::string, double> tol;
    int q = 8;
};

RunConfig parse_run_config(const json& j) {
    static const std::set<std::string> known{"validate", "spectrum",  "poles", "invariant",
                                             "projector", "invert", "report"};
    if (!j.is_object()) throw input_error("run config must be a JSON object");
    RunConfig rc;
    if (!j.contains("model") || !j.at("model").is_string())
        throw input_error("run config needs a 'model' path");
    rc.model_path = j.at("model").get<std::string>();
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (g.is_array() && g.size() == 2) {
            rc.nx = g[0].get<int>();
            rc.ny = g[1].get<int>();
        } else if (g.is_object()) {
            rc.nx = g.value("nx", 16);
            rc.ny = g.value("ny", 16);
        } else if (g.is_string()) {
            std::tie(rc.nx, rc.ny) = parse_grid(g.get<std::string>());
        } else {
            throw input_error("run config grid must be [nx,ny], {nx,ny} or 'nx,ny'");
        }
    }
    if (rc.nx < 1 || rc.ny < 1) throw input_error("run config grid entries must be positive");
    if (!j.contains("tasks") || !j.at("tasks").is_array() || j.at("tasks").empty())
        throw input_error("run config needs a non-empty 'tasks' array");
    for (const json& t : j.at("tasks")) {
        TaskSpec ts;
        if (t.is_string()) {
            ts.name = t.get<std::string>();
        } else if (t.is_object() && t.contains("name") && t.at("name").is_string()) {
            ts.name = t.at("name").get<std::string>();
            ts.params = t;
        } else {
            throw input_error("each task must be a name or an object with a 'name'");
        }
        if (!known.count(ts.name)) throw input_error("unknown task name '" + ts.name + "'");
        rc.tasks.push_back(std::move(ts));
    }
    auto pos = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < rc.tasks.size(); ++i)
            if (rc.tasks[i].name == name) return static_cast<int>(i);
        return -1;
    };
    int p_proj = pos("projector"), p_poles = pos("poles"), p_val = pos("validate");
    if (p_proj >= 0 && (p_poles < 0 || p_poles > p_proj))
        throw input_error("task 'projector' requires 'poles' earlier in the task list");
    if (p_val > 0) throw input_error("task 'validate' must come first when present");
    rc.output_dir = j.value("output_dir", std::string("run_out"));
    if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
    rc.q = j.value("q", 8);
    if (rc.q < 1) throw input_error("run config q must be positive");
    if (j.contains("tolerances")) {
        if (!j.at("tolerances").is_object()) throw input_error("tolerances must be an object");
        for (const auto& [key, val] : j.at("tolerances").items()) {
            double v = detail::real_of(val, "tolerances");
            if (!(v > 0)) throw input_error("tolerance '" + key + "' must be positive");
            rc.tol[key] = v;
        }
    }
    return rc;
}

int cmd_run(const std::string& cfg_path) {
    RunConfig rc;
    try {
        rc = parse_run_config(detail::load_json_file(cfg_path));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    fs::path out(rc.output_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create output directory '%s'\n", rc.output_dir.c_str());
        return kExitUsage;
    }

    json task_rows = json::array();
    json spectral;
    int exit_code = kExitOk;
    std::string failure;

    std::optional<Ctx> ctx;
    try {
        ctx = make_ctx(rc.model_path, std::to_string(rc.nx) + "," + std::to_string(rc.ny), rc.q);
    } catch (const model_invalid& e) {
        exit_code = kExitModel;
        failure = std::string("model invalid: ") + e.what();
    } catch (const std::exception& e) {
        exit_code = kExitUsage;
        failure = e.what();
    }

    RunState st;
    for (const TaskSpec& ts : rc.tasks) {
        json row{{"name", ts.name}};
        if (exit_code != kExitOk) {
            row["status"] = "skipped";
            task_rows.push_back(row);
            continue;
        }
        try {
            if (ts.name == "validate") {
                task_validate(*ctx, ts.params, out);
            } else if (ts.name == "spectrum") {
                task_spectrum(*ctx, ts.params, out, rc.tol);
            } else if (ts.name == "poles") {
                task_poles(*ctx, st, ts.params, out, rc.seed);
            } else if (ts.name == "invariant") {
                task_invariant(*ctx, ts.params, out, rc.tol);
            } else if (ts.name == "projector") {
                task_projector(*ctx, st, ts.params, out, rc.tol);
            } else if (ts.name == "invert") {
                task_invert(*ctx, st, ts.params, out, rc.tol);
            } else if (ts.name == "report") {
                spectral = task_report(*ctx, ts.params, out, rc.seed);
            }
            row["status"] = "ok";
        } catch (const model_invalid& e) {
            row["status"] = "failed";
            row["error"] = e.what();
            exit_code = kExitModel;
            failure = std::string("model invalid: ") + e.what();
        } catch (const numeric_error& e) {
            row["status"] = "failed";
            row["error"] = e.what();
            exit_code = kExitNumeric;
            failure = e.what();
        } catch (const std::exception& e) {
            row["status"] = "failed";
            row["error"] = e.what();
            exit_code = kExitUsage;
            failure = e.what();
        }
        task_rows.push_back(row);
    }

    json report{{"model", rc.model_path},
                {"model_name", fs::path(rc.model_path).stem().string()},
                {"seed", rc.seed},
                {"q", rc.q},
                {"tasks", task_rows},
                {"status", exit_code == kExitOk ? "ok" : "failed"}};
    if (ctx) {
        report["grid"] = json{{"nx", ctx->nx},
                              {"ny_base", ctx->ny_base},
                              {"tag", ctx->basis.tag},
                              {"n_cells", ctx->basis.n_cells()}};
    } else {
        report["grid"] = json{{"nx", rc.nx}, {"ny_base", rc.ny}};
    }
    if (!failure.empty()) report["failure"] = failure;
    if (!spectral.is_null()) report["spectral"] = spectral;
    write_json_file(out / "report.json", report);

    if (exit_code != kExitOk) std::fprintf(stderr, "run failed: %s\n", failure.c_str());
    std::printf("%s\n", (out / "report.json").string().c_str());
    return exit_code;
}

int cmd_plot_data(const std::string& dir) {
    fs::path in(dir);
    fs::path report_path = in / "report.json";
    if (!fs::exists(report_path)) {
        std::fprintf(stderr, "error: %s is missing\n", report_path.string().c_str());
        return kExitArtifact;
    }
    json report;
    try {
        report = detail::load_json_file(report_path.string());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitArtifact;
    }

    auto task_ok = [&](const std::string& name) {
        if (!report.contains("tasks") || !report.at("tasks").is_array()) return false;
        for (const json& row : report.at("tasks"))
            if (row.value("name", std::string()) == name && row.value("status", std::string()) == "ok")
                return true;
        return false;
    };
    auto need = [&](const fs::path& p) {
        if (!fs::exists(p)) {
            std::fprintf(stderr, "error: expected artifact %s is missing\n", p.string().c_str());
            return false;
        }
        return true;
    };

    int written = 0;
    try {
        if (task_ok("spectrum")) {
            fs::path src = in / "spectrum.json";
            if (!need(src)) return kExitArtifact;
            json j = detail::load_json_file(src.string());
            std::string csv = "re,im,modulus\n";
            for (const json& row : j.at("values")) {
                double re = detail::real_of(row.at("value")[0], "spectrum value");
                double im = detail::real_of(row.at("value")[1], "spectrum value");
                char buf[128];
                std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", re, im, std::hypot(re, im));
                csv += buf;
            }
            detail::save_text_file((in / "spectrum_scatter.csv").string(), csv);
            ++written;
        }
        if (task_ok("poles")) {
            fs::path src = in / "poles.json";
            if (!need(src)) return kExitArtifact;
            json j = detail::load_json_file(src.string());
            std::string csv = "re,im,log_norm\n";
            for (const json& row : j.at("heatmap")) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", detail::real_of(row.at("re"), "heatmap"),
                              detail::real_of(row.at("im"), "heatmap"),
                              detail::real_of(row.at("log_norm"), "heatmap"));
                csv += buf;
            }
            detail::save_text_file((in / "pole_heatmap.csv").string(), csv);
            ++written;
        }
        if (task_ok("invert")) {
            fs::path src = in / "invert.json";
            if (!need(src)) return kExitArtifact;
            json j = detail::load_json_file(src.string());
            json rungs = j.contains("ladder") ? j.at("ladder") : json::array({j});
            std::string csv = "k,weak_error\n";
            for (const json& row : rungs) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "%.12e,%.12e\n", detail::real_of(row.at("k"), "ladder"),
                              detail::real_of(row.at("weak_error"), "ladder"));
                csv += buf;
            }
            detail::save_text_file((in / "inversion_ladder.csv").string(), csv);
            ++written;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: malformed artifact: %s\n", e.what());
        return kExitArtifact;
    }
    if (written == 0)
        std::fprintf(stderr, "note: report lists no plottable tasks, nothing to do\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "semigroup-spectra: transfer operators, resolvents and Laplace inversion on\n"
        "branched expanding suspension models.\n"
        "Exit codes: 0 ok, 1 numerical check failed, 2 model invalid,\n"
        "3 structural atlas error, 64 usage error, 66 missing artifact."};
    app.require_subcommand(1);

    std::string arg_file, arg_model, arg_grid = "16,16", arg_out = ".";
    std::string arg_z = "2,0", arg_path = "quad", arg_strip, arg_center = "0,0";
    std::string arg_in;
    double arg_t = 1.0, arg_s = 1.0, arg_a = 1.0, arg_k = 200.0, arg_radius = 0.25;
    int arg_q = 8, arg_keigs = 8, arg_density = 64, arg_nodes = 64, arg_nnodes = 0;
    int arg_grid_n = 64;
    bool arg_ladder = false;
    std::uint64_t arg_seed = 23;

    auto add_model_grid = [&](CLI::App* sub) {
        sub->add_option("--model", arg_model, "model JSON file")->required();
        sub->add_option("--grid", arg_grid, "cell grid 'nx,ny'");
        sub->add_option("--q", arg_q, "subcell sampling order");
        sub->add_option("--out", arg_out, "output directory");
    };

    CLI::App* c_validate = app.add_subcommand("validate", "check atlas axioms for an atlas JSON file");
    c_validate->add_option("atlas", arg_file, "atlas JSON file")->required();
    c_validate->add_option("--grid-n", arg_grid_n, "sampling density per chart");

    CLI::App* c_model = app.add_subcommand("model", "model level checks");
    c_model->require_subcommand(1);
    CLI::App* c_model_check = c_model->add_subcommand("check", "validate atlas and expansion hypotheses");
    c_model_check->add_option("model", arg_file, "model JSON file")->required();

    CLI::App* c_measure = app.add_subcommand("measure", "measure utilities");
    c_measure->require_subcommand(1);
    CLI::App* c_measure_norm = c_measure->add_subcommand("norm", "norms of a measure CSV");
    c_measure_norm->add_option("--in", arg_in, "measure CSV file")->required();
    c_measure_norm->add_option("--model", arg_model, "model JSON file (enables the derivative norm)");
    c_measure_norm->add_option("--grid", arg_grid, "cell grid 'nx,ny'");

    CLI::App* c_transfer = app.add_subcommand("transfer", "assemble the time-t transfer matrix");
    add_model_grid(c_transfer);
    c_transfer->add_option("--t", arg_t, "flow time")->required();

    CLI::App* c_average = app.add_subcommand("average", "assemble the Laplace-averaged operator");
    add_model_grid(c_average);
    c_average->add_option("--s", arg_s, "averaging rate (Re s > 0)")->required();

    CLI::App* c_resolvent = app.add_subcommand("resolvent", "assemble the resolvent at a point");
    add_model_grid(c_resolvent);
    c_resolvent->add_option("--z", arg_z, "evaluation point 're,im'")->required();
    c_resolvent->add_option("--path", arg_path, "assembly path: quad or gen")
        ->check(CLI::IsMember({"quad", "gen"}));

    CLI::App* c_spectrum = app.add_subcommand("spectrum", "leading transfer spectrum at time t");
    add_model_grid(c_spectrum);
    c_spectrum->add_option("--t", arg_t, "flow time")->required();
    c_spectrum->add_option("--k", arg_keigs, "number of eigenvalues");

    CLI::App* c_poles = app.add_subcommand("poles", "scan a strip for resolvent poles");
    add_model_grid(c_poles);
    c_poles->add_option("--strip", arg_strip, "strip 're_min,re_max,im_max'")->required();
    c_poles->add_option("--density", arg_density, "scan density");
    c_poles->add_option("--seed", arg_seed, "probe seed");

    CLI::App* c_invariant = app.add_subcommand("invariant", "compute the invariant density");
    add_model_grid(c_invariant);
    c_invariant->add_option("--t-probe", arg_t, "probe time");

    CLI::App* c_projector = app.add_subcommand("projector", "spectral projector from a contour");
    add_model_grid(c_projector);
    c_projector->add_option("--center", arg_center, "contour center 're,im'")->required();
    c_projector->add_option("--radius", arg_radius, "contour radius")->required();
    c_projector->add_option("--nodes", arg_nodes, "contour nodes");

    CLI::App* c_invert = app.add_subcommand("invert", "Laplace inversion back to the transfer operator");
    add_model_grid(c_invert);
    c_invert->add_option("--t", arg_t, "reconstruction time")->required();
    c_invert->add_option("--a", arg_a, "contour abscissa (a > 0)")->required();
    c_invert->add_option("--k", arg_k, "truncation height")->required();
    c_invert->add_flag("--ladder", arg_ladder, "run the refinement ladder up to k");
    c_invert->add_option("--n-nodes", arg_nnodes, "override node count (0 = automatic)");

    CLI::App* c_run = app.add_subcommand("run", "execute a task pipeline from a config file");
    c_run->add_option("config", arg_file, "run config JSON file")->required();

    CLI::App* c_plot = app.add_subcommand("plot-data", "export plot CSVs from a run directory");
    c_plot->add_option("dir", arg_file, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(c_validate)) {
            json j = detail::load_json_file(arg_file);
            BranchedSurfaceAtlas atlas;
            try {
                atlas = atlas_from_json(j);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "structural error: %s\n", e.what());
                return kExitStructural;
            }
            ValidationReport vr = validate_atlas(atlas, arg_grid_n);
            std::printf("%s\n", validation_report_to_json(vr).dump(2).c_str());
            if (!vr.structurally_ok()) return kExitStructural;
            return vr.pass() ? kExitOk : kExitModel;
        }

        if (app.got_subcommand(c_model)) {
            SuspensionModel m = load_model_cli(arg_file);
            ValidationReport vr = validate_atlas(m.atlas());
            ExpansionReport er = verify_expansion(m, 200, {1.0, 2.0, 3.0, 4.0});
            json j{{"validation", validation_report_to_json(vr)},
                   {"expansion", expansion_report_to_json(er)}};
            std::printf("%s\n", j.dump(2).c_str());
            return (vr.pass() && er.pass) ? kExitOk : kExitModel;
        }

        if (app.got_subcommand(c_measure)) {
            std::string tag = "unchecked";
            std::optional<Ctx> ctx;
            if (!arg_model.empty()) {
                ctx = make_ctx(arg_model, arg_grid, arg_q);
                tag = ctx->basis.tag;
            }
            DiscreteMeasure mu = load_measure_csv(arg_in, tag);
            json j{{"n_cells", mu.coeffs.size()},
                   {"tv", detail::fixed_real(tv_norm(mu))},
                   {"mass", detail::real_pair(mass_functional(mu))}};
            if (ctx) {
                if (static_cast<int>(mu.coeffs.size()) != ctx->basis.n_cells())
                    throw input_error("measure length " + std::to_string(mu.coeffs.size()) +
                                      " does not match grid " + ctx->basis.tag);
                j["d_norm"] = detail::fixed_real(d_norm(ctx->model, ctx->basis, mu));
            }
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_transfer)) {
            if (arg_t < 0) throw input_error("transfer time must be nonnegative");
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            OperatorMatrix op = assemble_transfer(ctx.model, ctx.basis, arg_t, ctx.q);
            char name[64];
            std::snprintf(name, sizeof name, "transfer_t%.6g.bin", arg_t);
            save_matrix((fs::path(arg_out) / name).string(), op);
            json j{{"t", detail::fixed_real(arg_t)},
                   {"grid", ctx.basis.tag},
                   {"n_cells", ctx.basis.n_cells()},
                   {"tv_norm", detail::fixed_real(tv_opnorm(op.mat))},
                   {"matrix", (fs::path(arg_out) / name).string()}};
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_average)) {
            if (arg_s <= 0) throw input_error("averaging rate must be positive");
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            OperatorMatrix op = average_operator(ctx.model, ctx.basis, arg_s);
            char name[64];
            std::snprintf(name, sizeof name, "average_s%.6g.bin", arg_s);
            save_matrix((fs::path(arg_out) / name).string(), op);
            json j{{"s", detail::fixed_real(arg_s)},
                   {"grid", ctx.basis.tag},
                   {"n_cells", ctx.basis.n_cells()},
                   {"tv_norm", detail::fixed_real(tv_opnorm(op.mat))},
                   {"matrix", (fs::path(arg_out) / name).string()}};
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_resolvent)) {
            cplx z = parse_complex(arg_z);
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            OperatorMatrix op{ComplexMatrix(0, 0), Provenance{}, ""};
            double budget = 0.0;
            if (arg_path == "quad") {
                ResolventConfig cfg;
                cfg.q = arg_q;
                op = resolvent_quadrature(ctx.model, ctx.basis, z, cfg);
                budget = cfg.tail_tol / std::max(z.real(), 1e-30);
            } else {
                GeneratorMatrix gen = build_generator(ctx.model, ctx.basis);
                op = resolvent_from_generator(gen, z);
                budget = std::numeric_limits<double>::quiet_NaN();
                if (auto it = op.prov.params.find("rcond"); it != op.prov.params.end())
                    budget = std::numeric_limits<double>::epsilon() / it->second;
            }
            char name[96];
            std::snprintf(name, sizeof name, "resolvent_%s_%.6g_%.6g.bin", arg_path.c_str(), z.real(),
                          z.imag());
            save_matrix((fs::path(arg_out) / name).string(), op);
            json j{{"z", detail::real_pair(z)},
                   {"path", arg_path},
                   {"grid", ctx.basis.tag},
                   {"error_budget", detail::fixed_real(budget)},
                   {"tv_norm", detail::fixed_real(tv_opnorm(op.mat))},
                   {"matrix", (fs::path(arg_out) / name).string()}};
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_spectrum)) {
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            json j = task_spectrum(ctx, json{{"t", arg_t}, {"k", arg_keigs}}, arg_out, {});
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_poles)) {
            Strip strip = parse_strip(arg_strip);
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            RunState st;
            json params{{"strip", json::array({strip.re_min, strip.re_max, strip.im_max})},
                        {"density", arg_density}};
            json j = task_poles(ctx, st, params, arg_out, arg_seed);
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_invariant)) {
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            json j = task_invariant(ctx, json{{"t_probe", arg_t}}, arg_out, {});
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_projector)) {
            cplx center = parse_complex(arg_center);
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            RunState st;
            json params{{"center", json::array({center.real(), center.imag()})},
                        {"radius", arg_radius},
                        {"nodes", arg_nodes}};
            json j = task_projector(ctx, st, params, arg_out, {});
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_invert)) {
            Ctx ctx = make_ctx(arg_model, arg_grid, arg_q);
            fs::create_directories(arg_out);
            RunState st;
            json params{{"t", arg_t},       {"a", arg_a},           {"k", arg_k},
                        {"ladder", arg_ladder}, {"n_nodes", arg_nnodes}};
            json j = task_invert(ctx, st, params, arg_out, {});
            std::printf("%s\n", j.dump(2).c_str());
            return kExitOk;
        }

        if (app.got_subcommand(c_run)) return cmd_run(arg_file);
        if (app.got_subcommand(c_plot)) return cmd_plot_data(arg_file);
    } catch (const model_invalid& e) {
        std::fprintf(stderr, "model invalid: %s\n", e.what());
        return kExitModel;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numerical check failed: %s\n", e.what());
        return kExitNumeric;
    } catch (const input_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitOk;
}
