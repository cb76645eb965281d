#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "airyproc/airyproc.hpp"

namespace fs = std::filesystem;
using namespace airyproc;

namespace {

constexpr const char* kSchemaVersion = "1.0";

/// A cell is empty (null), an integer, a real, or text.
using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
        rows.push_back(std::move(row));
    }
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
    if (std::holds_alternative<double>(c)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(c));
        return buf;
    }
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return "";
}

void write_csv(std::ostream& os, const Table& t) {
    os << "spec_version";
    for (const auto& col : t.columns) os << ',' << csv_field(col);
    os << "\r\n";
    for (const auto& row : t.rows) {
        os << kSchemaVersion;
        for (const auto& c : row) os << ',' << csv_field(cell_text(c));
        os << "\r\n";
    }
}

void write_json_lines(std::ostream& os, const Table& t) {
    for (const auto& row : t.rows) {
        nlohmann::ordered_json rec;
        rec["spec_version"] = kSchemaVersion;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            auto& slot = rec[t.columns[i]];
            if (std::holds_alternative<long long>(c))
                slot = std::get<long long>(c);
            else if (std::holds_alternative<double>(c))
                slot = std::isfinite(std::get<double>(c)) ? nlohmann::ordered_json(std::get<double>(c)) : nullptr;
            else if (std::holds_alternative<std::string>(c))
                slot = std::get<std::string>(c);
            else
                slot = nullptr;
        }
        os << rec.dump() << '\n';
    }
}

struct Common {
    std::string format = "csv";
    std::string output;
    double alpha_min = -10.0;
    double alpha_max = 8.0;
    std::size_t nodes = 18001;
    double tol = 1e-13;
    bool no_cache = false;
    unsigned workers = 0;
    Discretization disc;
};

std::optional<fs::path> cache_dir() {
    if (const char* d = std::getenv("AIRYPROC_CACHE_DIR"); d && *d) return fs::path(d);
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "airyproc";
    if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "airyproc";
    return std::nullopt;
}

std::string cache_name(const Common& o) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "hastings_mcleod_v1_%.17g_%.17g_%zu_%.3g.bin", o.alpha_min, o.alpha_max, o.nodes,
                  o.tol);
    return buf;
}

PainleveSolution load_solution(const Common& o) {
    PainleveOptions opt;
    opt.alpha_min = o.alpha_min;
    opt.alpha_max = o.alpha_max;
    opt.n_nodes = o.nodes;
    opt.tol = o.tol;
    const auto dir = o.no_cache ? std::nullopt : cache_dir();
    if (!dir) return PainleveSolution::solve(opt);
    const fs::path file = *dir / cache_name(o);
    if (std::ifstream in{file, std::ios::binary}) {
        try {
            PainleveSolution s = PainleveSolution::read(in);
            if (s.alpha_min() == opt.alpha_min && s.alpha_max() == opt.alpha_max && s.n_nodes() == opt.n_nodes &&
                s.tolerance() == opt.tol)
                return s;
        } catch (const std::exception& e) {
            std::cerr << "warning: ignoring cache file " << file << ": " << e.what() << '\n';
        }
    }
    PainleveSolution s = PainleveSolution::solve(opt);
    std::error_code ec;
    fs::create_directories(*dir, ec);
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (out) s.write(out);
        if (!out) {
            std::cerr << "warning: could not write cache file " << file << '\n';
            fs::remove(tmp, ec);
            return s;
        }
    }
    fs::rename(tmp, file, ec);
    if (ec) std::cerr << "warning: could not write cache file " << file << ": " << ec.message() << '\n';
    return s;
}

void validate_common(const Common& o) {
    if (!(o.alpha_min <= -8.0)) throw CLI::ValidationError("--alpha-min", "must be <= -8");
    if (!(o.alpha_max >= 6.0)) throw CLI::ValidationError("--alpha-max", "must be >= 6");
    if (o.nodes < 2000) throw CLI::ValidationError("--nodes", "must be >= 2000");
    if (!(o.tol > 0.0)) throw CLI::ValidationError("--tol", "must be positive");
    try {
        o.disc.validate();
    } catch (const std::exception& e) {
        throw CLI::ValidationError("discretization", e.what());
    }
}

struct Range {
    double lo = 0.0, hi = 0.0;
    bool set = false;
};

Range parse_range(const std::string& flag, const std::string& text) {
    Range r;
    if (text.empty()) return r;
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError(flag, "expected lo:hi");
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
        r.lo = std::stod(a, &p1);
        r.hi = std::stod(b, &p2);
        if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected lo:hi with numeric bounds");
    }
    if (!(r.lo < r.hi)) throw CLI::ValidationError(flag, "lo must be below hi");
    r.set = true;
    return r;
}

// ---- painleve-table

struct TableArgs {
    double from = -8.0, to = 8.0, step = 0.25;
};

void validate(const TableArgs& a, const Common& o) {
    if (!(a.step > 0.0)) throw CLI::ValidationError("--step", "must be positive");
    if (!(a.from <= a.to)) throw CLI::ValidationError("--from", "must not exceed --to");
    if (a.from < o.alpha_min || a.to > o.alpha_max)
        throw CLI::ValidationError("--from/--to", "range must lie inside [alpha-min, alpha-max]");
    if ((a.to - a.from) / a.step > 1e6) throw CLI::ValidationError("--step", "too many rows");
}

Table run(const TableArgs& a, const PainleveSolution& sol) {
    Table t{{"alpha", "q", "qp", "gp", "g", "g1p", "g2p", "F2", "F2p"}, {}};
    const auto count = static_cast<long long>(std::floor((a.to - a.from) / a.step + 1e-9));
    for (long long k = 0; k <= count; ++k) {
        const double x = a.from + static_cast<double>(k) * a.step;
        const TailIntegrals ti = sol.tails(x);
        t.add({x, sol.q(x), sol.qp(x), ti.gp, ti.g, ti.g1p, ti.g2p, sol.f2_cdf(x), sol.f2_pdf(x)});
    }
    return t;
}

// ---- joint

struct JointArgs {
    double t = 1.0, u = 0.0, v = 0.0;
    std::string method = "exact";
    std::size_t n = 100, samples = 20000;
    std::uint64_t seed = 1;
};

void validate(const JointArgs& a) {
    if (a.method != "exact" && a.method != "series2" && a.method != "series4" && a.method != "mc")
        throw CLI::ValidationError("--method", "must be exact, series2, series4 or mc");
    if ((a.method == "series2" || a.method == "series4") && !(a.t > 0.0))
        throw CLI::ValidationError("--t", "series methods need t > 0");
    if (a.method == "mc" && !(a.t >= 0.0)) throw CLI::ValidationError("--t", "mc needs t >= 0");
    if (a.method == "exact" && std::min(a.u, a.v) < kLowestThreshold)
        throw CLI::ValidationError("--u/--v", "thresholds must be >= -10 for the exact method");
    if (a.method == "mc" && (a.n < 2 || a.samples < 1)) throw CLI::ValidationError("--n/--samples", "need n >= 2, samples >= 1");
}

Table run(const JointArgs& a, const Common& o, const PainleveSolution* sol) {
    Table t{{"t", "u", "v", "method", "value", "error_estimate"}, {}};
    double value = 0.0, err = 0.0;
    if (a.method == "exact") {
        const auto r = joint_cdf(a.t, a.u, a.v, o.disc);
        value = r.value;
        err = r.refinement_error;
    } else if (a.method == "mc") {
        CoupledEnsembleConfig cfg;
        cfg.n = a.n;
        cfg.t = a.t;
        cfg.samples = a.samples;
        cfg.seed = a.seed;
        const auto e = empirical_joint_cdf(sample_batch(cfg, o.workers), a.u, a.v);
        value = e.value;
        err = e.stderr_;
    } else {
        // size of the first omitted order, estimated from the last retained term
        const double s2 = joint_series(*sol, a.t, a.u, a.v, 2);
        const double s4 = joint_series(*sol, a.t, a.u, a.v, 4);
        value = a.method == "series2" ? s2 : s4;
        err = a.method == "series2" ? std::fabs(s4 - s2) : std::fabs(s4 - s2) / (a.t * a.t);
    }
    t.add({a.t, a.u, a.v, a.method, value, err});
    return t;
}

// ---- pde-residual

struct PdeArgs {
    double t = 1.0, mesh = 0.02, t_mesh = 0.0;
    std::string u_range, v_range, x_range, y_range;
    std::string form = "uv", source = "exact";
    Range a, b;
};

void validate(PdeArgs& a) {
    if (a.form != "uv" && a.form != "xy") throw CLI::ValidationError("--form", "must be uv or xy");
    if (a.source != "exact" && a.source != "series") throw CLI::ValidationError("--source", "must be exact or series");
    if (!(a.mesh > 0.0)) throw CLI::ValidationError("--mesh", "must be positive");
    if (a.t_mesh == 0.0) a.t_mesh = a.mesh;
    if (!(a.t_mesh > 0.0)) throw CLI::ValidationError("--t-mesh", "must be positive");
    if (!(a.t - a.t_mesh > 0.0)) throw CLI::ValidationError("--t", "t - t-mesh must be positive");
    if (a.form == "uv") {
        if (!a.x_range.empty() || !a.y_range.empty())
            throw CLI::ValidationError("--x-range/--y-range", "only valid with --form xy");
        a.a = parse_range("--u-range", a.u_range.empty() ? "-1.1:-0.9" : a.u_range);
        a.b = parse_range("--v-range", a.v_range.empty() ? "0.4:0.6" : a.v_range);
    } else {
        if (!a.u_range.empty() || !a.v_range.empty())
            throw CLI::ValidationError("--u-range/--v-range", "only valid with --form uv");
        a.a = parse_range("--x-range", a.x_range.empty() ? "-1.6:-1.4" : a.x_range);
        a.b = parse_range("--y-range", a.y_range.empty() ? "-0.6:-0.4" : a.y_range);
    }
    for (const Range* r : {&a.a, &a.b}) {
        const double cells = (r->hi - r->lo) / a.mesh;
        if (std::fabs(cells - std::round(cells)) > 1e-6)
            throw CLI::ValidationError("ranges", "each range must be a whole number of mesh cells");
        if (std::round(cells) < 4) throw CLI::ValidationError("ranges", "each range must span at least 4 mesh cells");
        if (std::round(cells) > 400) throw CLI::ValidationError("ranges", "at most 400 mesh cells per axis");
    }
}

Table run(const PdeArgs& a, const Common& o, const PainleveSolution& sol) {
    const auto coords = a.form == "uv" ? GridCoordinates::UV : GridCoordinates::XY;
    const auto source = a.source == "exact" ? GridSource::ExactFredholm : GridSource::Series4;
    const StencilGrid g =
        build_grid(sol, source, a.t, a.a.lo, a.a.hi, a.b.lo, a.b.hi, a.mesh, a.t_mesh, coords, o.disc, o.workers);
    Table t{{"t", "u", "v", "x", "y", "form", "source", "mesh", "lhs", "rhs", "residual", "scale",
             "relative_residual"},
            {}};
    for (std::size_t i = 2; i + 2 < g.extent_a(); ++i)
        for (std::size_t j = 2; j + 2 < g.extent_b(); ++j) {
            Cell rel;
            ResidualReport r;
            try {
                r = coords == GridCoordinates::UV ? pde_residual_uv(g, i, j) : pde_residual_xy(g, i, j);
                rel = r.relative_residual;
            } catch (const std::domain_error&) {
                r.point = {g.t0, 0.0, 0.0};
            }
            const double u = r.point[1], v = r.point[2];
            t.add({g.t0, u, v, u - v, u + v, a.form, a.source, a.mesh, r.lhs, r.rhs, r.residual, r.scale, rel});
        }
    return t;
}

// ---- covariance

struct CovArgs {
    std::vector<double> t{4.0, 6.0, 8.0};
    double window = 8.0, mesh = 0.25;
};

void validate(const CovArgs& a) {
    for (double t : a.t)
        if (!(t > 0.0)) throw CLI::ValidationError("--t", "every t must be positive");
    if (!(a.window >= 8.0)) throw CLI::ValidationError("--window", "must be >= 8");
    if (!(a.mesh > 0.0 && a.mesh <= 0.25)) throw CLI::ValidationError("--mesh", "must be in (0, 0.25]");
    const double cells = 2.0 * a.window / a.mesh;
    if (std::fabs(cells - std::round(cells)) > 1e-9) throw CLI::ValidationError("--mesh", "must divide 2 * window");
}

Table run(const CovArgs& a, const Common& o) {
    Table t{{"t", "covariance", "cov_t2", "coefficient_t4"}, {}};
    for (double tv : a.t) {
        const auto r = covariance_exact(tv, a.window, a.mesh, o.disc, o.workers);
        t.add({r.t, r.covariance, r.scaled, r.coefficient});
    }
    return t;
}

// ---- c-constant

struct CArgs {
    double window = 10.0, mesh = 0.05;
};

void validate(const CArgs& a) {
    if (!(a.window >= 8.0)) throw CLI::ValidationError("--window", "must be >= 8");
    if (!(a.mesh > 0.0 && a.mesh <= 0.1)) throw CLI::ValidationError("--mesh", "must be in (0, 0.1]");
    const double cells = 2.0 * a.window / a.mesh;
    if (std::fabs(cells - std::round(cells)) > 1e-9) throw CLI::ValidationError("--mesh", "must divide 2 * window");
}

Table run(const CArgs& a, const PainleveSolution& sol) {
    const double c = c_constant(sol, a.window, a.mesh);
    const double half = c_constant(sol, a.window, a.mesh / 2.0);
    Table t{{"window", "mesh", "c", "c_half_mesh", "relative_change"}, {}};
    t.add({a.window, a.mesh, c, half, std::fabs(c - half) / std::fabs(c)});
    return t;
}

// ---- mc-validate

struct McArgs {
    std::size_t n = 100, samples = 20000;
    double t = 1.0;
    std::uint64_t seed = 1;
    std::vector<double> grid{-2.0, -1.0, 0.0, 1.0};
    std::string batch_csv;
};

void validate(const McArgs& a) {
    if (a.n < 2) throw CLI::ValidationError("--n", "must be >= 2");
    if (a.samples < 1) throw CLI::ValidationError("--samples", "must be >= 1");
    if (!(a.t >= 0.0)) throw CLI::ValidationError("--t", "must be >= 0");
    if (a.grid.empty()) throw CLI::ValidationError("--grid", "must not be empty");
    for (double g : a.grid)
        if (g < kLowestThreshold) throw CLI::ValidationError("--grid", "levels must be >= -10");
}

Table run(const McArgs& a, const Common& o, const PainleveSolution& sol) {
    CoupledEnsembleConfig cfg;
    cfg.n = a.n;
    cfg.t = a.t;
    cfg.samples = a.samples;
    cfg.seed = a.seed;
    const auto batch = sample_batch(cfg, o.workers);
    if (!a.batch_csv.empty()) {
        std::ofstream out(a.batch_csv);
        if (!out) throw std::runtime_error("cannot open " + a.batch_csv);
        write_batch_csv(out, batch);
    }
    std::vector<double> a0, at;
    for (const auto& p : batch.pairs) {
        a0.push_back(p.a0);
        at.push_back(p.at);
    }
    Table t{{"kind", "u", "v", "empirical", "stderr", "exact", "series4"}, {}};
    auto cdf = [&](double u) { return sol.f2_cdf(u); };
    t.add({std::string("sup_distance_A0"), Cell{}, Cell{}, sup_distance(a0, cdf), Cell{}, Cell{}, Cell{}});
    t.add({std::string("sup_distance_At"), Cell{}, Cell{}, sup_distance(at, cdf), Cell{}, Cell{}, Cell{}});
    for (double u : a.grid) {
        const auto e = empirical_cdf(a0, u);
        t.add({std::string("marginal_A0"), u, Cell{}, e.value, e.stderr_, sol.f2_cdf(u), sol.f2_cdf(u)});
    }
    for (double u : a.grid)
        for (double v : a.grid) {
            const auto e = empirical_joint_cdf(batch, u, v);
            const double exact = joint_cdf(a.t, u, v, o.disc).value;
            const Cell series = a.t > 0.0 ? Cell{joint_series(sol, a.t, u, v, 4)} : Cell{};
            t.add({std::string("joint"), u, v, e.value, e.stderr_, exact, series});
        }
    return t;
}

void add_common(CLI::App* sub, Common& o) {
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output,-o", o.output, "Output file (default stdout)");
    sub->add_option("--alpha-min", o.alpha_min, "Left end of the Painleve domain");
    sub->add_option("--alpha-max", o.alpha_max, "Right end of the Painleve domain");
    sub->add_option("--nodes", o.nodes, "Painleve grid nodes");
    sub->add_option("--tol", o.tol, "Newton tolerance");
    sub->add_flag("--no-cache", o.no_cache, "Do not read or write the solution cache");
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    sub->add_option("--truncation", o.disc.truncation, "Fredholm truncation length L");
    sub->add_option("--quad-order", o.disc.quad_order, "Fredholm Gauss-Legendre points per block");
    sub->add_option("--z-quad-order", o.disc.z_quad_order, "Gauss-Legendre points per z panel");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-time Airy process toolkit: Painleve tables, Fredholm determinants, expansions, PDE checks, "
                 "matrix Monte Carlo"};
    app.require_subcommand(1);
    Common common;

    TableArgs table_args;
    auto* c_table = app.add_subcommand("painleve-table", "Hastings-McLeod solution and Tracy-Widom table");
    c_table->add_option("--from", table_args.from, "First alpha");
    c_table->add_option("--to", table_args.to, "Last alpha");
    c_table->add_option("--step", table_args.step, "Alpha step");

    JointArgs joint_args;
    auto* c_joint = app.add_subcommand("joint", "P(A(0) <= u, A(t) <= v)");
    c_joint->add_option("--t", joint_args.t, "Time gap");
    c_joint->add_option("--u", joint_args.u, "Threshold at time 0");
    c_joint->add_option("--v", joint_args.v, "Threshold at time t");
    c_joint->add_option("--method", joint_args.method, "exact | series2 | series4 | mc");
    c_joint->add_option("--n", joint_args.n, "Matrix size (mc)");
    c_joint->add_option("--samples", joint_args.samples, "Draws (mc)");
    c_joint->add_option("--seed", joint_args.seed, "Seed (mc)");

    PdeArgs pde_args;
    auto* c_pde = app.add_subcommand("pde-residual", "Finite-difference residual of the two-time equation");
    c_pde->add_option("--t", pde_args.t, "Centre time");
    c_pde->add_option("--mesh", pde_args.mesh, "Spatial mesh");
    c_pde->add_option("--t-mesh", pde_args.t_mesh, "Time mesh (default: mesh)");
    c_pde->add_option("--u-range", pde_args.u_range, "lo:hi for u (form uv)");
    c_pde->add_option("--v-range", pde_args.v_range, "lo:hi for v (form uv)");
    c_pde->add_option("--x-range", pde_args.x_range, "lo:hi for x = u - v (form xy)");
    c_pde->add_option("--y-range", pde_args.y_range, "lo:hi for y = u + v (form xy)");
    c_pde->add_option("--form", pde_args.form, "uv | xy");
    c_pde->add_option("--source", pde_args.source, "exact | series");

    CovArgs cov_args;
    auto* c_cov = app.add_subcommand("covariance", "Cov(A(0), A(t)) by Hoeffding's identity");
    c_cov->add_option("--t", cov_args.t, "Time gaps")->delimiter(',');
    c_cov->add_option("--window", cov_args.window, "Half-width of the integration square");
    c_cov->add_option("--mesh", cov_args.mesh, "Trapezoid mesh");

    CArgs c_args;
    auto* c_c = app.add_subcommand("c-constant", "Constant of the second covariance term");
    c_c->add_option("--window", c_args.window, "Half-width of the integration square");
    c_c->add_option("--mesh", c_args.mesh, "Trapezoid mesh");

    McArgs mc_args;
    auto* c_mc = app.add_subcommand("mc-validate", "Coupled-matrix Monte Carlo against exact and series values");
    c_mc->add_option("--n", mc_args.n, "Matrix size");
    c_mc->add_option("--t", mc_args.t, "Time gap");
    c_mc->add_option("--samples", mc_args.samples, "Draws");
    c_mc->add_option("--seed", mc_args.seed, "Seed");
    c_mc->add_option("--grid", mc_args.grid, "Threshold levels")->delimiter(',');
    c_mc->add_option("--batch-csv", mc_args.batch_csv, "Also write the raw batch to this CSV file");

    for (auto* sub : {c_table, c_joint, c_pde, c_cov, c_c, c_mc}) add_common(sub, common);

    try {
        app.parse(argc, argv);
        validate_common(common);
        if (c_table->parsed()) validate(table_args, common);
        if (c_joint->parsed()) validate(joint_args);
        if (c_pde->parsed()) validate(pde_args);
        if (c_cov->parsed()) validate(cov_args);
        if (c_c->parsed()) validate(c_args);
        if (c_mc->parsed()) validate(mc_args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto solution = [&] { return load_solution(common); };
        Table out;
        if (c_table->parsed()) {
            out = run(table_args, solution());
        } else if (c_joint->parsed()) {
            const bool series = joint_args.method == "series2" || joint_args.method == "series4";
            std::optional<PainleveSolution> sol;
            if (series) sol = solution();
            out = run(joint_args, common, sol ? &*sol : nullptr);
        } else if (c_pde->parsed()) {
            out = run(pde_args, common, solution());
        } else if (c_cov->parsed()) {
            out = run(cov_args, common);
        } else if (c_c->parsed()) {
            out = run(c_args, solution());
        } else if (c_mc->parsed()) {
            out = run(mc_args, common, solution());
        }

        std::ofstream file;
        if (!common.output.empty()) {
            file.open(common.output, std::ios::binary | std::ios::trunc);
            if (!file) throw std::runtime_error("cannot open output file " + common.output);
        }
        std::ostream& os = common.output.empty() ? std::cout : file;
        if (common.format == "json")
            write_json_lines(os, out);
        else
            write_csv(os, out);
        os.flush();
        if (!os) throw std::runtime_error("write failed");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
