// Acceptance suite: every criterion runs at its stated tolerance and prints
// one [PASS]/[FAIL] line.  Exit status is the number of failed criteria.
//
// Usage: acceptance <path-to-cli-binary> <path-to-golden-dir>
//
// Known red: criterion 7 includes the sub-check "tail below the closed-form
// upper-bound expression at every s <= 200", which fails by measurement (the
// expression only dominates the tail for s <= 3 at x = 1; see the unit suite
// for the pinned crossover).  The sub-check is asserted as stated anyway and
// the line reports the measured violation counts.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "iterdist/iterdist.hpp"

using namespace iterdist;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

std::string fmt(double v) { return format_number(v); }

// ---------------------------------------------------------------------------
// 1. Exponential fixed point, 1e-10, under 10 seconds.
Outcome criterion1() {
    Outcome o;
    double worst = 0.0;
    for (double lam : {0.5, 1.0, 3.0}) {
        const auto spec = DistributionSpec::exponential(lam);
        const auto grid = linspace(0.0, 20.0 / lam, 50);
        for (int s = 1; s <= 100; ++s)
            for (double x : grid)
                worst = std::max(worst,
                                 std::fabs(iterated_tail(spec, s, x) - std::exp(-lam * x)));
    }
    o.require(worst < 1e-10, "max deviation " + fmt(worst));
    o.note("max |tail - exp| = " + fmt(worst));
    return o;
}

// ---------------------------------------------------------------------------
// 2. Integer-shape closed form vs quadrature (1e-8) and vs the grid
//    recursion (1e-7 for s <= 8), under 60 seconds.
Outcome criterion2() {
    Outcome o;
    const auto grid = linspace(0.0, 20.0, 50);
    const std::array<int, 4> shapes{2, 3, 5, 8};
    const std::array<int, 4> steps{2, 5, 10, 50};
    double worst_quad = 0.0;
    for (int a : shapes) {
        const auto spec = DistributionSpec::gamma_int(a, 1.0);
        for (int s : steps) {
            const double log_norm = log_raw_moment(spec, s - 1);
            for (double x : grid) {
                const double closed = iterated_tail_gamma_closed(a, s, x);
                const auto quad = integrate_tail(
                    [&](double t) {
                        return std::pow(t - x, s - 1.0) * density(spec, t);
                    },
                    x, spec);
                const double oracle = quad.value / std::exp(log_norm);
                worst_quad = std::max(worst_quad, std::fabs(closed - oracle));
            }
        }
    }
    o.require(worst_quad < 1e-8, "closed vs quadrature " + fmt(worst_quad));

    double worst_ref = 0.0;
    for (int a : shapes) {
        const auto spec = DistributionSpec::gamma_int(a, 1.0);
        ReferenceIterator ref(spec, 5);
        for (int s : {2, 5})
            for (double x : grid)
                worst_ref = std::max(worst_ref, std::fabs(iterated_tail_gamma_closed(a, s, x) -
                                                          ref.tail_at(s, x)));
    }
    o.require(worst_ref < 1e-7, "closed vs recursion " + fmt(worst_ref));
    o.note("quad gap " + fmt(worst_quad) + ", recursion gap " + fmt(worst_ref));
    return o;
}

// ---------------------------------------------------------------------------
// 3. Moment formulas vs quadrature moments of the iterated density.
Outcome criterion3() {
    Outcome o;
    const std::vector<DistributionSpec> specs{
        DistributionSpec::gamma(0.5, 1.0), DistributionSpec::gamma_int(2, 1.0),
        DistributionSpec::gamma(3.7, 1.0), DistributionSpec::weibull(0.5, 1.0),
        DistributionSpec::weibull(2.0, 1.0)};

    struct TaskResult {
        double worst_rel = 0.0;
        double worst_norm = 0.0;
        double worst_var = 0.0;
    };
    auto run_pair = [](const DistributionSpec& spec, int s) {
        TaskResult r;
        QuadratureConfig outer;
        outer.rel_tol = 1e-9;
        std::map<double, double> cache;
        auto dens = [&](double x) {
            auto it = cache.find(x);
            if (it != cache.end()) return it->second;
            const double v = iterated_density(spec, s, x);
            cache.emplace(x, v);
            return v;
        };
        const auto norm = integrate_tail(dens, 0.0, spec, outer);
        r.worst_norm = std::fabs(norm.value - 1.0);
        std::array<double, 11> q{};
        q[0] = norm.value;
        for (unsigned m = 1; m <= 10; ++m) {
            const auto qm = integrate_tail(
                [&](double x) { return std::pow(x, static_cast<double>(m)) * dens(x); },
                0.0, spec, outer);
            q[m] = qm.value;
            const double formula = iterated_moment(spec, s, m);
            r.worst_rel = std::max(r.worst_rel, std::fabs(qm.value / formula - 1.0));
        }
        const double var_quad = q[2] - q[1] * q[1];
        r.worst_var = std::fabs(var_quad / iterated_variance(spec, s) - 1.0);
        return r;
    };

    std::vector<std::future<TaskResult>> jobs;
    for (const auto& spec : specs)
        for (int s = 2; s <= 10; ++s)
            jobs.push_back(std::async(std::launch::async, run_pair, spec, s));
    TaskResult agg;
    for (auto& j : jobs) {
        const auto r = j.get();
        agg.worst_rel = std::max(agg.worst_rel, r.worst_rel);
        agg.worst_norm = std::max(agg.worst_norm, r.worst_norm);
        agg.worst_var = std::max(agg.worst_var, r.worst_var);
    }
    o.require(agg.worst_rel < 1e-6, "moment mismatch " + fmt(agg.worst_rel));
    o.require(agg.worst_norm < 1e-6, "normalization off by " + fmt(agg.worst_norm));
    o.require(agg.worst_var < 1e-6, "variance mismatch " + fmt(agg.worst_var));

    // exponential closed case: mu_{s,m} = m!, variance = 1, to 1e-12
    const auto expo = DistributionSpec::exponential(1.0);
    double worst_exp = 0.0;
    for (int s = 1; s <= 10; ++s) {
        double fact = 1.0;
        for (unsigned m = 1; m <= 10; ++m) {
            fact *= m;
            worst_exp =
                std::max(worst_exp, std::fabs(iterated_moment(expo, s, m) / fact - 1.0));
        }
        worst_exp = std::max(worst_exp, std::fabs(iterated_variance(expo, s) - 1.0));
    }
    o.require(worst_exp < 1e-12, "exponential closed case off by " + fmt(worst_exp));
    o.note("rel gaps: moments " + fmt(agg.worst_rel) + ", variance " + fmt(agg.worst_var) +
           ", exponential " + fmt(worst_exp));
    return o;
}

// ---------------------------------------------------------------------------
// 4. The three convolution routes agree pairwise within 1e-8.
Outcome criterion4() {
    Outcome o;
    const auto grid = make_uniform_grid(40.0, 40001);
    const auto expo = DistributionSpec::exponential(1.0);
    double worst = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const auto erlang = DistributionSpec::gamma_int(n, 1.0);
        for (int s : {2, 3, 5, 10}) {
            const auto general = general_iterated_convolution(expo, n, s, grid);
            const auto recursion = gamma_iterated_density_recursion(n, 1.0, s, grid);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double direct = iterated_density(erlang, s, grid[i]);
                worst = std::max({worst,
                                  std::fabs(general.density_values[i] -
                                            recursion.density_values[i]),
                                  std::fabs(recursion.density_values[i] - direct),
                                  std::fabs(general.density_values[i] - direct)});
            }
        }
    }
    o.require(worst < 1e-8, "pairwise route gap " + fmt(worst));

    double worst_erlang = 0.0;
    for (int n = 2; n <= 5; ++n) {
        double fact = 1.0;
        for (int k = 1; k < n; ++k) fact *= k;
        for (double x : linspace(0.25, 10.0, 40)) {
            const double analytic = std::pow(x, n - 1.0) * std::exp(-x) / fact;
            worst_erlang = std::max(
                worst_erlang, std::fabs(gamma_difference_oracle(n, 1.0, 2, x) - analytic));
        }
    }
    o.require(worst_erlang < 1e-10, "s=2 Erlang tail difference gap " + fmt(worst_erlang));
    o.note("route gap " + fmt(worst) + ", s=2 analytic gap " + fmt(worst_erlang));
    return o;
}

// ---------------------------------------------------------------------------
// 5. Difference diagnostic report: oracle pinned to derived values, printed
//    formula recorded (not asserted equal), CSV archived.
Outcome criterion5() {
    Outcome o;
    const std::vector<double> xs{0.5, 1.0, 2.0, 5.0};
    const auto rows = gamma_difference_report({2, 3, 4, 5, 6}, {2, 3, 4, 5, 6}, xs);
    o.require(rows.size() == 100, "expected 100 rows");
    double worst = 0.0;
    for (const auto& r : rows) {
        if (r.s != 2) continue;
        double derived;
        if (r.n == 2)
            derived = r.x * std::exp(-r.x);
        else if (r.n == 3)
            derived = r.x * r.x * std::exp(-r.x) / 2.0;
        else
            continue;
        worst = std::max(worst, std::fabs(r.oracle - derived));
    }
    o.require(worst < 1e-10, "oracle vs derived " + fmt(worst));
    double max_dev = 0.0;
    for (const auto& r : rows) max_dev = std::max(max_dev, r.abs_diff);
    o.require(max_dev > 0.0, "report must record a deviation");
    std::ostringstream csv;
    write_diff_report_csv(csv, rows);
    write_file_atomic("acceptance_diff_report.csv", csv.str());
    o.note("oracle gap " + fmt(worst) + ", max printed-formula deviation " + fmt(max_dev) +
           " (archived: acceptance_diff_report.csv)");
    return o;
}

// ---------------------------------------------------------------------------
// 6. Gamma convergence: monotone sup-distance, the sandwich, and the frozen
//    terminal fixtures at s = 500.
Outcome criterion6() {
    Outcome o;
    const auto grid = linspace(0.0, 10.0, 50);
    const std::vector<int> steps{2, 5, 10, 20, 50, 100, 200, 500};
    const std::vector<std::pair<double, double>> fixtures{
        {0.5, 3.70e-4}, {2.0, 7.40e-4}, {5.0, 2.95e-3}};  // oracle-measured ceilings
    for (const auto& [shape, fixture] : fixtures) {
        const auto spec = shape == std::floor(shape)
                              ? DistributionSpec::gamma_int(static_cast<int>(shape), 1.0)
                              : DistributionSpec::gamma(shape, 1.0);
        const auto rep = convergence_report(spec, grid, steps);
        o.require(rep.monotone_observed,
                  "sup-distance not monotone for shape " + fmt(shape));
        o.require(rep.sup_distance.back() < fixture,
                  "terminal sup " + fmt(rep.sup_distance.back()) + " above fixture " +
                      fmt(fixture) + " for shape " + fmt(shape));
    }

    double sandwich_slack = 0.0;
    for (double alpha : {1.5, 2.5, 3.7}) {
        const int beta = static_cast<int>(std::ceil(alpha));
        const auto ga = DistributionSpec::gamma(alpha, 1.0);
        for (int s : {2, 5, 10})
            for (double x : grid) {
                const double mid = iterated_tail(ga, s, x);
                const double hi = iterated_tail_gamma_closed(beta, s, x);
                sandwich_slack = std::max(sandwich_slack, std::exp(-x) - mid);
                sandwich_slack = std::max(sandwich_slack, mid - hi);
            }
    }
    o.require(sandwich_slack < 1e-9, "sandwich violated by " + fmt(sandwich_slack));
    o.note("sandwich slack " + fmt(sandwich_slack));
    return o;
}

// ---------------------------------------------------------------------------
// 7. Weibull limits.  Includes the bound-dominance sub-check exactly as
//    stated, which fails by measurement; see the suite banner.
Outcome criterion7() {
    Outcome o;
    const auto w2 = DistributionSpec::weibull(2.0, 1.0);
    double prev_tail = 1.0;
    double prev_bound = 0.0;
    int bound_violations = 0;
    bool decreasing = true;
    bool bound_decreasing = true;
    for (int s = 2; s <= 200; ++s) {
        const double lt = iterated_log_tail(w2, s, 1.0);
        const double lb = log_weibull_tail_upper_bound(2.0, s, 1.0);
        const double t = std::exp(lt);
        if (t >= prev_tail) decreasing = false;
        prev_tail = t;
        if (lt > lb) ++bound_violations;
        if (s > 2 && lb >= prev_bound) bound_decreasing = false;
        prev_bound = lb;
    }
    o.require(decreasing, "shape-2 tail not decreasing in s");
    o.require(bound_violations == 0,
              "tail exceeds the stated bound at " + std::to_string(bound_violations) +
                  "/199 steps (measured: dominance only holds for s <= 3)");
    o.require(bound_decreasing && std::exp(prev_bound) < 1e-100,
              "bound does not vanish");

    const auto w05 = DistributionSpec::weibull(0.5, 1.0);
    bool nondecreasing = true;
    double prev = 0.0;
    for (int s = 2; s <= 7; ++s) {
        const double t = iterated_tail(w05, s, 1.0);
        if (t < prev - 1e-12) nondecreasing = false;
        prev = t;
    }
    o.require(nondecreasing, "shape-0.5 tail not nondecreasing in s");
    o.require(prev > 0.95, "tail at the measured step 7 is " + fmt(prev) + " <= 0.95");

    // measured bracketing fixtures: (beta, first order s0) at x = 1
    for (const auto& [beta, s0] : std::vector<std::pair<double, int>>{{0.1, 3}, {0.05, 6}}) {
        for (int s : {s0, s0 + 10, 50}) {
            const auto b = weibull_stop_loss_bounds(0.5, s, beta, 1.0);
            o.require(b.lower_holds && b.log_value <= b.log_upper + 1e-12,
                      "bracketing fails at beta " + fmt(beta) + ", s " + std::to_string(s));
        }
        const auto before = weibull_stop_loss_bounds(0.5, s0 - 1, beta, 1.0);
        o.require(!before.lower_holds,
                  "recorded s0 " + std::to_string(s0) + " is not minimal for beta " +
                      fmt(beta));
    }
    o.note("shape-2 bound violations: " + std::to_string(bound_violations) +
           "/199; shape-0.5 tail at s=7: " + fmt(prev));
    return o;
}

// ---------------------------------------------------------------------------
// 8. Ordering matrix and heredity.
Outcome criterion8() {
    Outcome o;
    const std::vector<double> shapes{0.5, 1.0, 2.0, 3.0, 5.0};
    auto make = [](double a) {
        if (a == std::floor(a)) return DistributionSpec::gamma_int(static_cast<int>(a), 1.0);
        return DistributionSpec::gamma(a, 1.0);
    };
    const auto grid = linspace(0.15, 15.0, 100);
    for (double ax : shapes)
        for (double ay : shapes) {
            for (int s : {1, 2, 3}) {
                const auto r = sfr_check(make(ax), make(ay), s, grid, 1e-9);
                const bool expect = ax <= ay;
                o.require(r.monotone_nondecreasing == expect,
                          "pair (" + fmt(ax) + "," + fmt(ay) + ") s=" + std::to_string(s) +
                              " verdict " + (r.monotone_nondecreasing ? "monotone" : "not") +
                              ", expected " + (expect ? "monotone" : "not"));
            }
            if (ax <= ay)
                for (int s = 1; s <= 4; ++s) {
                    const auto p = sfr_heredity_probe(make(ax), make(ay), s, grid, 1e-9);
                    o.require(p.at_s.monotone_nondecreasing && p.implication_holds,
                              "heredity fails for (" + fmt(ax) + "," + fmt(ay) +
                                  ") at s=" + std::to_string(s));
                }
        }
    return o;
}

// ---------------------------------------------------------------------------
// 9. Monte-Carlo agreement: KS below 1.63/sqrt(1e5) in at least 95/100
//    seeded repetitions per configuration, under 120 seconds.
Outcome criterion9() {
    Outcome o;
    constexpr std::size_t n = 100000;
    const double threshold = 1.63 / std::sqrt(static_cast<double>(n));
    struct Config {
        DistributionSpec spec;
        int s;
    };
    const std::vector<Config> configs{{DistributionSpec::gamma_int(2, 1.0), 4},
                                      {DistributionSpec::gamma(0.5, 1.0), 3},
                                      {DistributionSpec::weibull(2.0, 1.0), 3},
                                      {DistributionSpec::exponential(1.0), 7}};
    for (const auto& [spec, s] : configs) {
        std::function<double(double)> tail_fn;
        std::optional<IteratedTailCurve> curve;
        if (spec.has_integer_shape()) {
            tail_fn = [&spec = spec, s = s](double x) { return iterated_tail(spec, s, x); };
        } else {
            const double x_max = invert_weighted_tail(spec, s, 1e-10) * 1.3;
            curve.emplace(spec, s, x_max, 8193);
            tail_fn = [&c = *curve](double x) { return c.tail_at(x); };
        }
        int passes = 0;
        for (int rep = 0; rep < 100; ++rep) {
            const auto batch = sample_iterated(spec, s, n, 777000 + rep);
            if (ks_distance_against(batch, tail_fn) < threshold) ++passes;
        }
        o.require(passes >= 95, spec.description() + " s=" + std::to_string(s) + ": " +
                                    std::to_string(passes) + "/100 below threshold");
        o.note(spec.description() + " s=" + std::to_string(s) + ": " +
               std::to_string(passes) + "/100");
    }
    return o;
}

// ---------------------------------------------------------------------------
// 10. CLI golden files, byte for byte.
std::string run_cli(const std::string& cli, const std::string& args, int& exit_code) {
    const std::string cmd = cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return {};
    }
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    const int rc = pclose(pipe);
    exit_code = (rc >= 256) ? rc / 256 : rc;
    return out;
}

Outcome criterion10(const std::string& cli, const std::string& golden_dir) {
    Outcome o;
    std::ifstream commands(golden_dir + "/commands.txt");
    o.require(static_cast<bool>(commands), "cannot open " + golden_dir + "/commands.txt");
    std::string line;
    int checked = 0;
    while (std::getline(commands, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto bar = line.find('|');
        if (bar == std::string::npos) continue;
        const std::string name = line.substr(0, bar);
        const std::string args = line.substr(bar + 1);
        int rc = 0;
        const std::string got = run_cli(cli, args, rc);
        std::ifstream ref(golden_dir + "/" + name + ".csv", std::ios::binary);
        std::stringstream want;
        want << ref.rdbuf();
        o.require(rc == 0, name + ": exit code " + std::to_string(rc));
        o.require(static_cast<bool>(ref), name + ": missing golden file");
        o.require(got == want.str(), name + ": output differs from golden");
        ++checked;
    }
    o.require(checked >= 8, "only " + std::to_string(checked) + " golden commands found");

    // exit-status contract: 0 success, 2 usage, 3 numerical failure
    int rc = 0;
    run_cli(cli, "tail --family gamma --shape 2 --x 1", rc);  // missing --s
    o.require(rc == 2, "usage error returned " + std::to_string(rc));
    run_cli(cli, "stoploss --family weibull --shape 0.25 --order 50 --x 1 --max-panels 8",
            rc);
    o.require(rc == 3, "numerical failure returned " + std::to_string(rc));
    run_cli(cli, "tail --family gamma --shape 2 --s 4 --x 2", rc);
    o.require(rc == 0, "success returned " + std::to_string(rc));

    SampleBatch probe = sample_iterated(DistributionSpec::gamma_int(2, 1.0), 4, 64, 42);
    SampleBatch again = sample_iterated(DistributionSpec::gamma_int(2, 1.0), 4, 64, 42);
    o.require(probe.values == again.values, "sampling not reproducible in-process");
    o.note(std::to_string(checked) + " golden commands compared byte-for-byte");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <cli-binary> <golden-dir>\n");
        return 64;
    }
    const std::string cli = argv[1];
    const std::string golden = argv[2];

    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double budget_seconds;  // 0 = no budget
    };
    const std::vector<Entry> entries{
        {1, "exponential fixed point (1e-10, s<=100)", criterion1, 10.0},
        {2, "integer-Gamma closed form vs quadrature and recursion", criterion2, 60.0},
        {3, "moment formulas vs quadrature moments (1e-6 rel)", criterion3, 0.0},
        {4, "convolution routes pairwise within 1e-8", criterion4, 0.0},
        {5, "difference diagnostic: oracle pinned, deviation recorded", criterion5, 0.0},
        {6, "Gamma convergence: monotone, sandwich, frozen fixtures", criterion6, 0.0},
        {7, "Weibull limits and stop-loss bounds", criterion7, 0.0},
        {8, "tail-ratio ordering matrix and heredity", criterion8, 0.0},
        {9, "Monte-Carlo KS agreement (95/100 at 1e5)", criterion9, 120.0},
        {10, "CLI golden files byte-for-byte",
         [&] { return criterion10(cli, golden); }, 0.0},
    };

    int failed = 0;
    for (const auto& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.note(std::string("exception: ") + ex.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (e.budget_seconds > 0.0 && secs > e.budget_seconds) {
            o.pass = false;
            o.note("runtime " + std::to_string(secs) + "s exceeds budget");
        }
        std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", e.id,
                    e.name, secs, o.detail.empty() ? "" : " -- ", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    if (failed > 0)
        std::printf("%d criterion(s) failed (criterion 7 contains a sub-check that fails "
                    "by measurement; see notes in the repo docs and tests)\n",
                    failed);
    return failed;
}
