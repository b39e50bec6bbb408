#pragma once

#include "algmech/config.hpp"
#include "algmech/expression.hpp"
#include "algmech/models.hpp"
#include "algmech/suite.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace algmech {

namespace cli_detail {

/// User Hamiltonian over the state labels, model auxiliaries and model parameters, with symbolic gradient.
inline MultiSection expression_hamiltonian(const std::string& text, const ChartPtr& chart, const BuiltModel& model) {
    const std::vector<std::string> labels = chart->labels;
    const int dim = chart->base_dim;
    std::vector<std::string> names = labels;
    std::vector<AuxVariable> aux;
    for (const auto& a : model.aux_variables)
        if (std::find(names.begin(), names.end(), a.name) == names.end()) {
            names.push_back(a.name);
            aux.push_back(a);
        }
    std::vector<double> consts;
    for (const auto& [k, v] : model.params)
        if (std::find(names.begin(), names.end(), k) == names.end()) {
            names.push_back(k);
            consts.push_back(v);
        }
    const Expression e = parse_expression(text, names);
    std::vector<Expression> d_state, d_aux;
    for (const auto& l : labels) d_state.push_back(e.derivative(l));
    for (const auto& a : aux) d_aux.push_back(e.derivative(a.name));
    auto values = [aux, consts, dim](const ChartPoint& s) {
        std::vector<double> v(s.data(), s.data() + dim);
        for (const auto& a : aux) v.push_back(a.value(s));
        v.insert(v.end(), consts.begin(), consts.end());
        return v;
    };
    return scalar_field(
        chart, [e, values](const ChartPoint& s) { return e.evaluate(values(s)); },
        [d_state, d_aux, aux, values, dim](const ChartPoint& s) {
            const std::vector<double> v = values(s);
            Vector g(dim);
            for (int i = 0; i < dim; ++i) g[i] = d_state[static_cast<std::size_t>(i)].evaluate(v);
            for (std::size_t k = 0; k < aux.size(); ++k) g += d_aux[k].evaluate(v) * aux[k].gradient(s);
            return g;
        });
}

inline Json params_json(const ParameterMap& p) {
    Json j = Json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

/// Writes to --out when given, else to `out`.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (cfg.out.empty()) {
        write(out);
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + cfg.out + "'");
    write(f);
}

inline void emit_json(const RunConfig& cfg, std::ostream& out, const Json& j) {
    emit(cfg, out, [&j](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline std::string output_format(const RunConfig& cfg, const std::string& fallback,
                                 std::initializer_list<const char*> allowed) {
    const std::string f = cfg.format.empty() ? fallback : cfg.format;
    for (const char* a : allowed)
        if (f == a) return f;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw ConfigError("format '" + f + "' is not available for " + cfg.command + " (choose " + list + ")");
}

inline void print_checks(std::ostream& os, const Report& rep) {
    for (const auto& c : rep.checks) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", c.max_residual);
        os << (c.passed ? "pass  " : "FAIL  ") << c.name << "  residual " << buf;
        std::snprintf(buf, sizeof buf, "%.1e", c.tolerance);
        os << "  tol " << buf << '\n';
    }
}

inline ChartPoint initial_point(const RunConfig& cfg, const BuiltModel& b, int dim) {
    ChartPoint x = b.default_init;
    if (cfg.init) x = Eigen::Map<const Vector>(cfg.init->data(), static_cast<Eigen::Index>(cfg.init->size()));
    if (x.size() != dim)
        throw InputError("initial point has " + std::to_string(x.size()) + " entries, the model state has " +
                         std::to_string(dim));
    return x;
}

inline ReductionSetup configured_setup(const RunConfig& cfg, const BuiltModel& b) {
    if (!b.reduction) throw InputError("model '" + b.name + "' provides no reduction setup");
    ReductionSetup s = *b.reduction;
    if (cfg.samples) s.samples = *cfg.samples;
    if (cfg.seed) s.seed = *cfg.seed;
    if (cfg.tol) s.tol = *cfg.tol;
    if (cfg.hamiltonian) s.hamiltonian = expression_hamiltonian(*cfg.hamiltonian, s.sub.ambient, b);
    return s;
}

inline ChartPoint initial_point_on_N(const RunConfig& cfg, const ReductionSetup& s) {
    ChartPoint x = s.default_init;
    if (cfg.init) x = Eigen::Map<const Vector>(cfg.init->data(), static_cast<Eigen::Index>(cfg.init->size()));
    if (x.size() != s.sub.ambient->base_dim)
        throw InputError("initial point has " + std::to_string(x.size()) + " entries, M has dimension " +
                         std::to_string(s.sub.ambient->base_dim));
    if (s.sub.constraints(x).lpNorm<Eigen::Infinity>() > 1e-10)
        throw InputError("initial point " + format_point(x) + " does not lie on N");
    return x;
}

inline Json reduced_row(const ReducedModel& red, const ChartPoint& q, const std::string& source) {
    Json row;
    row["source"] = source;
    row["point"] = to_json(q);
    row["anchor"] = to_json(red.chart->anchor_at(q));
    const StructureConstants C = red.chart->structure_at(q);
    Json br = Json::object();
    for (int a = 0; a < red.chart->rank; ++a)
        for (int b = a + 1; b < red.chart->rank; ++b)
            br["[e" + std::to_string(a + 1) + ",e" + std::to_string(b + 1) + "]"] = to_json(C.column(a, b));
    row["brackets"] = br;
    row["omega"] = to_json(red.omega.matrix_at(q));
    row["H"] = red.reduced_H ? Json(red.reduced_H->value(q)) : Json(nullptr);
    return row;
}

}  // namespace cli_detail

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const BuiltModel b = build_model(cfg.model, cfg.params);
    SuiteOptions opt;
    if (cfg.samples) opt.samples = *cfg.samples;
    if (cfg.seed) opt.seed = *cfg.seed;
    opt.tol = cfg.tol ? *cfg.tol : b.chart->default_tolerance();
    opt.poisson_tol = std::max(opt.poisson_tol, opt.tol);
    Report rep = structural_suite(b.chart, b.box, opt);
    if (b.symplectic && b.symplectic->chart == b.chart) {
        SymplecticReport sr = verify_symplectic(*b.symplectic, sample_points(b.box, opt.samples, opt.seed), opt.tol);
        for (auto& c : sr.report.checks) c.name = "model " + c.name;
        rep.append(sr.report);
    }
    const std::string fmt = cli_detail::output_format(cfg, "json", {"json", "text"});
    if (fmt == "json") {
        Json j;
        j["command"] = "verify";
        j["model"] = b.name;
        j["params"] = cli_detail::params_json(b.params);
        j["samples"] = opt.samples;
        j["seed"] = opt.seed;
        j["tolerance"] = opt.tol;
        j["passed"] = rep.passed();
        j["checks"] = to_json(rep)["checks"];
        cli_detail::emit_json(cfg, out, j);
    } else {
        cli_detail::emit(cfg, out, [&rep](std::ostream& os) { cli_detail::print_checks(os, rep); });
    }
    if (const CheckResult* f = rep.first_failure()) {
        err << "check failed: " << f->name << '\n';
        return 1;
    }
    return 0;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const BuiltModel b = build_model(cfg.model, cfg.params);
    cli_detail::output_format(cfg, "csv", {"csv"});
    const double t_end = cfg.t_end.value_or(1.0);
    const double h = cfg.h.value_or(1e-3);
    Trajectory tr;
    if (b.system) {
        HamiltonianSystem sys = *b.system;
        if (cfg.hamiltonian) sys.H = cli_detail::expression_hamiltonian(*cfg.hamiltonian, sys.prolong.chart, b);
        const ChartPoint x0 = cli_detail::initial_point(cfg, b, sys.prolong.m + sys.prolong.n);
        tr = integrate(sys, x0, t_end, h);
    } else if (b.symplectic && b.hamiltonian) {
        const SymplecticSection W = *b.symplectic;
        const MultiSection H = cfg.hamiltonian ? cli_detail::expression_hamiltonian(*cfg.hamiltonian, W.chart, b)
                                               : *b.hamiltonian;
        const ChartPoint x0 = cli_detail::initial_point(cfg, b, W.chart->base_dim);
        tr = integrate_field([&](const Vector& x) { return hamiltonian_vector_field(W, H, x); },
                             [&](const Vector& x) { return H.value(x); }, x0, t_end, h);
        tr.labels = W.chart->labels;
        tr.periodic = W.chart->periodic;
    } else {
        throw InputError("model '" + b.name + "' defines no dynamics");
    }
    cli_detail::emit(cfg, out, [&tr](std::ostream& os) { write_csv(tr, os); });
    if (tr.aborted) {
        err << "diagnostic: " << tr.diagnostic << '\n';
        return 1;
    }
    return 0;
}

inline int cmd_reduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const BuiltModel b = build_model(cfg.model, cfg.params);
    ReductionSetup s = cli_detail::configured_setup(cfg, b);
    const std::string fmt = cli_detail::output_format(cfg, "json", {"json", "text"});
    std::optional<ChartPoint> init;
    if (cfg.init || s.default_init.size() == s.sub.ambient->base_dim) init = cli_detail::initial_point_on_N(cfg, s);
    PipelineResult res = run_reduction(s);
    const CheckResult* fail = res.report.first_failure();

    Json j;
    j["command"] = "reduce";
    j["model"] = b.name;
    j["params"] = cli_detail::params_json(b.params);
    j["samples"] = s.samples;
    j["seed"] = s.seed;
    j["tolerance"] = s.tol;
    j["passed"] = res.passed();
    j["first_failure"] = fail ? Json(fail->name) : Json(nullptr);
    Json kernel;
    kernel["dimension"] = s.omega_B ? Json(s.omega_B->kernel_dim) : Json(nullptr);
    kernel["frame_size"] = s.kernel_frame.size();
    j["kernel"] = kernel;
    j["checks"] = to_json(res.report)["checks"];
    if (res.passed() && res.reduced) {
        const ReducedModel& red = *res.reduced;
        Json r;
        r["base_dim"] = red.chart->base_dim;
        r["rank"] = red.chart->rank;
        r["labels"] = red.chart->labels;
        Json rows = Json::array();
        if (init) rows.push_back(cli_detail::reduced_row(red, s.action.projection(s.sub.to_sub(*init)), "init"));
        for (const auto& q : s.quotient_samples(s.samples)) rows.push_back(cli_detail::reduced_row(red, q, "sample"));
        r["rows"] = rows;
        j["reduced"] = r;
    } else {
        j["reduced"] = nullptr;
    }
    if (fmt == "json") {
        cli_detail::emit_json(cfg, out, j);
    } else {
        cli_detail::emit(cfg, out, [&res](std::ostream& os) { cli_detail::print_checks(os, res.report); });
    }
    if (fail) {
        err << "reduction hypothesis failed: " << fail->name;
        if (!fail->detail.empty()) err << " (" << fail->detail << ")";
        err << '\n';
        return 1;
    }
    return 0;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const BuiltModel b = build_model(cfg.model, cfg.params);
    ReductionSetup s = cli_detail::configured_setup(cfg, b);
    const std::string fmt = cli_detail::output_format(cfg, "json", {"json", "text"});
    const ChartPoint init = cli_detail::initial_point_on_N(cfg, s);
    if (!s.hamiltonian) throw InputError("model '" + b.name + "' has no Hamiltonian; set [fields] hamiltonian");
    PipelineResult res = run_reduction(s);
    if (const CheckResult* f = res.report.first_failure()) {
        err << "reduction hypothesis failed: " << f->name << '\n';
        return 1;
    }
    const double t_end = cfg.t_end.value_or(2.0);
    const double h = cfg.h.value_or(1e-3);
    const double tol = cfg.tol.value_or(1e-6);
    const double drift_tol = 1e-8;
    const CommutationResult cr =
        verify_commutation(s, *res.reduced, *s.hamiltonian, *res.reduced->reduced_H, init, t_end, h);
    const bool pass = cr.max_deviation <= tol && cr.constraint_drift <= drift_tol;
    if (fmt == "json") {
        Json j;
        j["command"] = "compare";
        j["model"] = b.name;
        j["params"] = cli_detail::params_json(b.params);
        j["init"] = to_json(init);
        j["t_end"] = t_end;
        j["h"] = h;
        j["max_deviation"] = cr.max_deviation;
        j["constraint_drift"] = cr.constraint_drift;
        j["tolerance"] = tol;
        j["drift_tolerance"] = drift_tol;
        j["passed"] = pass;
        cli_detail::emit_json(cfg, out, j);
    } else {
        cli_detail::emit(cfg, out, [&](std::ostream& os) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "max deviation    %.6e\nconstraint drift %.6e\nresult           %s (tol %.1e)\n",
                          cr.max_deviation, cr.constraint_drift, pass ? "PASS" : "FAIL", tol);
            os << buf;
        });
    }
    if (!pass) {
        err << "deviation above tolerance\n";
        return 1;
    }
    return 0;
}

/// Dispatches one command; maps errors to exit codes 1 (mathematical) and 2 (usage or input).
inline int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.model.empty()) throw ConfigError("no model given (use --model or [run] model)");
        if (cfg.command == "verify") return cmd_verify(cfg, out, err);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
        if (cfg.command == "reduce") return cmd_reduce(cfg, out, err);
        if (cfg.command == "compare") return cmd_compare(cfg, out, err);
        throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const HypothesisError& e) {
        err << "reduction hypothesis failed: " << e.check.name << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Lie algebroid mechanics: verify models, simulate, reduce, compare full and reduced dynamics", "algmech"};
    app.set_help_flag("--help", "print this help and exit");  // -h would collide with the step-size option --h
    RunConfig flags;
    std::string config_path;
    std::vector<std::string> params;
    std::vector<double> init;
    double t_end = 0, h = 0, tol = 0;
    int samples = 0;
    std::uint64_t seed = 0;
    app.add_option("command", flags.command, "verify | simulate | reduce | compare")
        ->required()
        ->check(CLI::IsMember({"verify", "simulate", "reduce", "compare"}));
    app.add_option("--model", flags.model, "model name");
    app.add_option("--config", config_path, "INI-style run configuration");
    app.add_option("--params", params, "parameter overrides k=v")->delimiter(',');
    auto* o_init = app.add_option("--init", init, "initial point v1,v2,...")->delimiter(',');
    auto* o_h = app.add_option("--h", h, "step size");
    auto* o_t = app.add_option("--t-end", t_end, "final time");
    auto* o_tol = app.add_option("--tol", tol, "tolerance");
    auto* o_samples = app.add_option("--samples", samples, "sample count")->check(CLI::Range(1, 100000));
    auto* o_seed = app.add_option("--seed", seed, "sampling seed");
    app.add_option("--out", flags.out, "output file (default stdout)");
    app.add_option("--format", flags.format, "json | text | csv");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        for (const auto& p : params) {
            const auto eq = p.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--params expects k=v, got '" + p + "'");
            flags.params[p.substr(0, eq)] = config_detail::to_real(p.substr(eq + 1), "--params " + p.substr(0, eq));
        }
        if (o_init->count()) flags.init = init;
        if (o_h->count()) flags.h = h;
        if (o_t->count()) flags.t_end = t_end;
        if (o_tol->count()) flags.tol = tol;
        if (o_samples->count()) flags.samples = samples;
        if (o_seed->count()) flags.seed = seed;
        RunConfig cfg = config_path.empty() ? flags : merge_config(load_config(config_path), flags);
        return run_command(cfg, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace algmech
