// Command-line front end: every library capability as a CSV-emitting
// subcommand.  Output schemas:
//   tail, density -> x,value          moments   -> m,value
//   stoploss      -> x,order,log_value,value_if_representable
//   converge      -> s,sup_distance   order     -> x,log_ratio
//   diff-report   -> n,s,x,paper_formula,oracle,abs_diff
//   sample        -> value
// Metadata rides on '#'-prefixed lines (tool version, spec, seed).
// Exit status: 0 success, 2 usage error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iterdist/iterdist.hpp"

namespace {

using iterdist::DistributionSpec;

struct SpecOptions {
    std::string family;
    double shape = 1.0;
    double scale = 1.0;
    double rate = 0.0;
};

void add_spec_options(CLI::App* cmd, SpecOptions& o, const std::string& suffix = "") {
    cmd->add_option("--family" + suffix, o.family, "gamma | weibull | exp")
        ->required()
        ->check(CLI::IsMember({"gamma", "weibull", "exp", "exponential"}));
    cmd->add_option("--shape" + suffix, o.shape, "shape parameter (gamma, weibull)");
    cmd->add_option("--scale" + suffix, o.scale, "scale parameter (default 1)");
    cmd->add_option("--rate" + suffix, o.rate, "rate (exponential; = 1/scale)");
}

DistributionSpec build_spec(const SpecOptions& o) {
    if (o.family == "exp" || o.family == "exponential") {
        const double rate = o.rate > 0.0 ? o.rate : 1.0 / o.scale;
        return DistributionSpec::exponential(rate);
    }
    if (o.family == "weibull") return DistributionSpec::weibull(o.shape, o.scale);
    // integral gamma shapes get the explicit integer path (exact closed forms)
    if (o.shape >= 1.0 && o.shape <= 1e6 && o.shape == std::floor(o.shape))
        return DistributionSpec::gamma_int(static_cast<int>(o.shape), o.scale);
    return DistributionSpec::gamma(o.shape, o.scale);
}

struct GridOptions {
    double x = -1.0;
    double x_min = 0.0;
    double x_max = -1.0;
    int x_points = 50;
    std::string x_spacing = "linear";
};

void add_grid_options(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--x", g.x, "single evaluation point");
    cmd->add_option("--x-min", g.x_min, "grid start");
    cmd->add_option("--x-max", g.x_max, "grid end");
    cmd->add_option("--x-points", g.x_points, "grid size")->check(CLI::PositiveNumber);
    cmd->add_option("--x-scale", g.x_spacing, "linear | log")
        ->check(CLI::IsMember({"linear", "log"}));
}

std::vector<double> build_grid(const GridOptions& g) {
    if (g.x >= 0.0) return {g.x};
    if (g.x_max <= g.x_min)
        throw CLI::ValidationError("grid", "need --x or --x-min/--x-max/--x-points");
    std::vector<double> xs;
    xs.reserve(g.x_points);
    if (g.x_spacing == "log") {
        if (g.x_min <= 0.0)
            throw CLI::ValidationError("grid", "log spacing needs --x-min > 0");
        const double r = std::log(g.x_max / g.x_min) / (g.x_points - 1);
        for (int i = 0; i < g.x_points; ++i) xs.push_back(g.x_min * std::exp(r * i));
    } else {
        const double h = (g.x_max - g.x_min) / (g.x_points - 1);
        for (int i = 0; i < g.x_points; ++i) xs.push_back(g.x_min + h * i);
    }
    return xs;
}

struct OutputOptions {
    std::string path;
};

void emit(const OutputOptions& o, const std::string& content) {
    if (o.path.empty()) {
        std::cout << content;
        return;
    }
    std::string path = o.path;
    const char* dir = std::getenv("ITERDIST_OUTPUT_DIR");
    if (dir && *dir && path.find('/') == std::string::npos)
        path = std::string(dir) + "/" + path;
    iterdist::write_file_atomic(path, content);
}

void add_common(CLI::App* cmd, OutputOptions& out, iterdist::QuadratureConfig& cfg) {
    cmd->add_option("--output", out.path, "write CSV here (atomically); default stdout");
    cmd->add_option("--rel-tol", cfg.rel_tol, "quadrature relative tolerance");
    cmd->add_option("--abs-tol", cfg.abs_tol, "quadrature absolute tolerance");
    cmd->add_option("--max-panels", cfg.max_panels, "quadrature panel budget");
    cmd->add_option("--truncation-mass", cfg.truncation_mass, "neglected tail mass");
}

void header(std::ostream& os, const DistributionSpec& spec) {
    iterdist::csv_comment(os, std::string("iterdist ") + iterdist::version);
    iterdist::csv_comment(os, "spec: " + spec.description());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iterated equilibrium distributions: tails, densities, moments, "
                 "stop-loss transforms, convergence and ordering diagnostics"};
    app.require_subcommand(1);

    SpecOptions spec_opt, spec_opt2;
    GridOptions grid_opt;
    OutputOptions out_opt;
    iterdist::QuadratureConfig cfg;
    int s = 1;
    int s_max = 100;
    unsigned m_max = 1;
    unsigned order = 0;
    int n_max = 6;
    int s_max_diff = 6;
    double lambda = 1.0;
    std::vector<double> x_list;
    std::uint64_t seed = 1;
    std::size_t count = 1000;

    auto* c_tail = app.add_subcommand("tail", "iterated tail values");
    add_spec_options(c_tail, spec_opt);
    add_grid_options(c_tail, grid_opt);
    add_common(c_tail, out_opt, cfg);
    c_tail->add_option("--s", s, "iteration step")->required()->check(CLI::PositiveNumber);

    auto* c_density = app.add_subcommand("density", "iterated density values");
    add_spec_options(c_density, spec_opt);
    add_grid_options(c_density, grid_opt);
    add_common(c_density, out_opt, cfg);
    c_density->add_option("--s", s, "iteration step (>= 2)")->required();

    auto* c_moments = app.add_subcommand("moments", "moments of the s-iterate");
    add_spec_options(c_moments, spec_opt);
    add_common(c_moments, out_opt, cfg);
    c_moments->add_option("--s", s, "iteration step")->required();
    c_moments->add_option("--m", m_max, "highest moment order")->required();

    auto* c_stoploss = app.add_subcommand("stoploss", "stop-loss transforms");
    add_spec_options(c_stoploss, spec_opt);
    add_grid_options(c_stoploss, grid_opt);
    add_common(c_stoploss, out_opt, cfg);
    c_stoploss->add_option("--order", order, "transform order")->required();

    auto* c_converge = app.add_subcommand("converge", "sup-distance to the limit per s");
    add_spec_options(c_converge, spec_opt);
    add_grid_options(c_converge, grid_opt);
    add_common(c_converge, out_opt, cfg);
    c_converge->add_option("--s-max", s_max, "largest iteration step")->required();

    auto* c_order = app.add_subcommand("order", "iterated-tail-ratio order check");
    add_spec_options(c_order, spec_opt);
    add_spec_options(c_order, spec_opt2, "2");
    add_grid_options(c_order, grid_opt);
    add_common(c_order, out_opt, cfg);
    c_order->add_option("--s", s, "iteration step")->required();

    auto* c_diff = app.add_subcommand("diff-report",
                                      "printed-formula vs oracle convolution difference");
    add_common(c_diff, out_opt, cfg);
    c_diff->add_option("--n-max", n_max, "largest convolution power (from 2)");
    c_diff->add_option("--s-max", s_max_diff, "largest iteration step (from 2)");
    c_diff->add_option("--rate", lambda, "exponential rate");
    c_diff->add_option("--x", x_list, "evaluation points")->expected(-1);

    auto* c_sample = app.add_subcommand("sample", "draw from the s-iterate");
    add_spec_options(c_sample, spec_opt);
    add_common(c_sample, out_opt, cfg);
    c_sample->add_option("--s", s, "iteration step")->required();
    c_sample->add_option("--count", count, "number of draws")->required();
    c_sample->add_option("--seed", seed, "RNG seed")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    std::ostringstream os;
    try {
        cfg.validate();
        if (c_tail->parsed()) {
            const auto spec = build_spec(spec_opt);
            header(os, spec);
            iterdist::csv_row(os, "x", "value");
            for (double x : build_grid(grid_opt))
                iterdist::csv_row(os, x, iterdist::iterated_tail(spec, s, x, cfg));
        } else if (c_density->parsed()) {
            const auto spec = build_spec(spec_opt);
            header(os, spec);
            iterdist::csv_row(os, "x", "value");
            for (double x : build_grid(grid_opt))
                iterdist::csv_row(os, x, iterdist::iterated_density(spec, s, x, cfg));
        } else if (c_moments->parsed()) {
            const auto spec = build_spec(spec_opt);
            header(os, spec);
            iterdist::csv_row(os, "m", "value");
            for (unsigned mm = 1; mm <= m_max; ++mm)
                iterdist::csv_row(os, static_cast<int>(mm),
                                  iterdist::iterated_moment(spec, s, mm));
        } else if (c_stoploss->parsed()) {
            const auto spec = build_spec(spec_opt);
            header(os, spec);
            iterdist::csv_row(os, "x", "order", "log_value", "value_if_representable");
            for (double x : build_grid(grid_opt)) {
                const double lv = iterdist::log_stop_loss(spec, x, order, cfg);
                const std::string linear =
                    std::fabs(lv) < 709.0 ? iterdist::format_number(std::exp(lv))
                                          : std::string();
                iterdist::csv_row(os, x, static_cast<int>(order), lv, linear);
            }
        } else if (c_converge->parsed()) {
            const auto spec = build_spec(spec_opt);
            std::vector<int> ss;
            for (int i = 1; i <= s_max; ++i) ss.push_back(i);
            const auto rep = iterdist::convergence_report(spec, build_grid(grid_opt), ss, cfg);
            header(os, spec);
            iterdist::csv_comment(os, std::string("limit_kind: ") +
                                          iterdist::limit_kind_name(rep.kind));
            iterdist::csv_row(os, "s", "sup_distance");
            for (std::size_t i = 0; i < ss.size(); ++i)
                iterdist::csv_row(os, ss[i], rep.sup_distance[i]);
        } else if (c_order->parsed()) {
            const auto sx = build_spec(spec_opt);
            const auto sy = build_spec(spec_opt2);
            const auto res = iterdist::sfr_check(sx, sy, s, build_grid(grid_opt), 1e-9, cfg);
            header(os, sx);
            iterdist::csv_comment(os, "spec2: " + sy.description());
            iterdist::csv_comment(
                os, std::string("monotone_nondecreasing: ") +
                        (res.monotone_nondecreasing ? "true" : "false") +
                        "  max_violation: " + iterdist::format_number(res.max_violation) +
                        "  dropped: " + std::to_string(res.dropped_points));
            iterdist::csv_row(os, "x", "log_ratio");
            for (std::size_t i = 0; i < res.grid.size(); ++i)
                iterdist::csv_row(os, res.grid[i], res.log_ratio[i]);
        } else if (c_diff->parsed()) {
            if (x_list.empty()) x_list = {0.5, 1.0, 2.0, 5.0};
            std::vector<int> ns, ss;
            for (int i = 2; i <= n_max; ++i) ns.push_back(i);
            for (int i = 2; i <= s_max_diff; ++i) ss.push_back(i);
            const auto rows = iterdist::gamma_difference_report(ns, ss, x_list, lambda);
            iterdist::csv_comment(os, std::string("iterdist ") + iterdist::version);
            iterdist::csv_comment(os, "rate: " + iterdist::format_number(lambda));
            iterdist::write_diff_report_csv(os, rows);
        } else if (c_sample->parsed()) {
            const auto spec = build_spec(spec_opt);
            const auto batch = iterdist::sample_iterated(spec, s, count, seed);
            iterdist::csv_comment(os, std::string("iterdist ") + iterdist::version);
            iterdist::write_sample_csv(os, batch);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        // bad argument values (negative x, s out of range, ...)
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const iterdist::quadrature_error& e) {
        std::cerr << "error: numerical: quadrature: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 3;
    }

    try {
        emit(out_opt, os.str());
    } catch (const std::exception& e) {
        std::cerr << "error: output: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
