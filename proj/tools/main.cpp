#include "CLI11.hpp"
#include "json.hpp"

#include "modone/errors.hpp"
#include "modone/fourier.hpp"
#include "modone/localstats.hpp"
#include "modone/montecarlo.hpp"
#include "modone/oscint.hpp"
#include "modone/seqgen.hpp"
#include "modone/version.hpp"
#include "modone/window.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modone;

namespace {

// ============================================================================
// Subcommand front end. Every run resolves its full configuration, writes its
// data artifacts, and finishes with a manifest naming the exact argument list
// that reproduces them; --from-manifest replays that list.
// ============================================================================

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_u(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::uint64_t parse_count(const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a count: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a count: '" + s + "'");
    return v;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& p : split_on(s, ',')) out.push_back(parse_double(p));
    return out;
}

std::vector<std::uint64_t> parse_counts(const std::string& s) {
    std::vector<std::uint64_t> out;
    for (const std::string& p : split_on(s, ',')) out.push_back(parse_count(p));
    return out;
}

// box:a:b | gauss:sigma:radius | bump:radius:order | simplex:x
Window parse_window(const std::string& text, int dim) {
    const std::vector<std::string> parts = split_on(text, ':');
    const std::string& kind = parts[0];
    if (kind == "box") {
        if (parts.size() != 3) throw std::invalid_argument("window box needs box:a:b");
        return Window::box1(parse_double(parts[1]), parse_double(parts[2]), dim);
    }
    if (kind == "gauss") {
        if (parts.size() != 3) throw std::invalid_argument("window gauss needs gauss:sigma:radius");
        return Window::gaussian(parse_double(parts[1]), parse_double(parts[2]), dim);
    }
    if (kind == "bump") {
        if (parts.size() != 3) throw std::invalid_argument("window bump needs bump:radius:order");
        return Window::bump(parse_double(parts[1]), static_cast<int>(parse_count(parts[2])), dim);
    }
    if (kind == "simplex") {
        if (parts.size() != 2) throw std::invalid_argument("window simplex needs simplex:x");
        return Window::simplex(parse_double(parts[1]), dim);
    }
    throw std::invalid_argument("unknown window kind '" + kind + "'");
}

std::string window_text(const Window& w) {
    switch (w.kind) {
        case Window::Kind::Box:
            return "box:" + fmt_g(w.lo[0]) + ":" + fmt_g(w.hi[0]);
        case Window::Kind::Gaussian:
            return "gauss:" + fmt_g(w.sigma) + ":" + fmt_g(w.radius);
        case Window::Kind::Bump:
            return "bump:" + fmt_g(w.radius) + ":" + std::to_string(w.order);
        case Window::Kind::Simplex:
            return "simplex:" + fmt_g(w.dilation);
    }
    return "";
}

struct CommonOpts {
    std::string outdir;
    std::string out;
    int threads = 0;

    fs::path dir() const {
        if (!outdir.empty()) return outdir;
        if (const char* env = std::getenv("MODONE_OUTDIR"); env && *env) return env;
        return ".";
    }

    int workers() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }

    fs::path artifact(const std::string& suffix) const { return dir() / (out + suffix); }
};

void add_common(CLI::App* sub, CommonOpts& c, const std::string& default_out) {
    c.out = default_out;
    sub->add_option("--outdir", c.outdir, "output directory (default: $MODONE_OUTDIR or .)");
    sub->add_option("--out", c.out, "artifact basename");
    sub->add_option("--threads", c.threads, "worker threads (default: available parallelism)");
}

std::ofstream open_artifact(const fs::path& path) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// manifest argv holds only the physically meaningful arguments, so a replay
// can pick its own --outdir, --out and --threads
void write_manifest(const CommonOpts& common, const std::string& sub,
                    const std::vector<std::string>& args,
                    const std::map<std::string, std::string>& config) {
    json j;
    j["version"] = version();
    j["subcommand"] = sub;
    json argv = json::array();
    argv.push_back(sub);
    for (const std::string& a : args) argv.push_back(a);
    j["argv"] = argv;
    j["config"] = config;
    std::ofstream out = open_artifact(common.artifact(".manifest.json"));
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest");
}

PrecisionPolicy make_policy(unsigned bits, double target) {
    if (bits > 0) return PrecisionPolicy::fixed_bits(bits);
    return PrecisionPolicy::auto_target(target);
}

// ---------------------------------------------------------------------------
// gen: evaluate one sequence and persist the point set

struct GenOpts {
    CommonOpts common;
    double alpha = 0.0;
    double beta = 1.0;
    std::uint64_t n = 0;
    unsigned bits = 0;
    double target = PrecisionPolicy{}.target_abs_err;
    bool text = false;
};

void cmd_gen(const GenOpts& o) {
    const SequenceSpec spec{o.alpha, o.beta, o.n};
    const PrecisionPolicy policy = make_policy(o.bits, o.target);
    const PointSet ps = frac_parts(spec, policy, o.common.workers());
    save_pointset(ps, o.common.artifact(".pointset").string());
    if (o.text) {
        std::ofstream out = open_artifact(o.common.artifact(".txt"));
        write_frac_parts_text(spec, policy, out);
    }
    std::vector<std::string> args{"--alpha", fmt_g(o.alpha), "--beta", fmt_g(o.beta),
                                  "--N",     fmt_u(o.n),     "--target", fmt_g(o.target)};
    if (o.bits > 0) {
        args.push_back("--bits");
        args.push_back(std::to_string(o.bits));
    }
    if (o.text) args.push_back("--text");
    write_manifest(o.common, "gen", args,
                   {{"alpha", fmt_g(o.alpha)},
                    {"beta", fmt_g(o.beta)},
                    {"n", fmt_u(o.n)},
                    {"precision_mode", o.bits > 0 ? "fixed" : "auto"},
                    {"precision_bits", std::to_string(ps.bits)},
                    {"precision_target", fmt_g(o.target)},
                    {"err_bound", fmt_g(ps.err_bound)},
                    {"threads", std::to_string(o.common.workers())}});
}

// ---------------------------------------------------------------------------
// corr: correlation sums for one alpha, an alpha list, or a stored point set

struct CorrOpts {
    CommonOpts common;
    std::vector<double> alphas;
    std::string from_file;
    double beta = 1.0;
    std::uint64_t n = 0;
    int k = 2;
    std::string window_spec;
    unsigned bits = 0;
    double target = PrecisionPolicy{}.target_abs_err;
};

void cmd_corr(const CorrOpts& o) {
    const Window w = parse_window(o.window_spec, o.k - 1);
    const double reference = poisson_reference(w);
    std::vector<double> params, values, refs;

    if (!o.from_file.empty()) {
        const PointSet ps = load_pointset(o.from_file);
        params.push_back(0.0);
        values.push_back(k_level_correlation(ps, w, o.k, o.common.workers()).value);
        refs.push_back(reference);
    } else {
        const PrecisionPolicy policy = make_policy(o.bits, o.target);
        for (double alpha : o.alphas) {
            const PointSet ps = frac_parts({alpha, o.beta, o.n}, policy, o.common.workers());
            params.push_back(alpha);
            values.push_back(k_level_correlation(ps, w, o.k, o.common.workers()).value);
            refs.push_back(reference);
        }
    }

    std::ofstream out = open_artifact(o.common.artifact(".csv"));
    write_correlation_grid_csv(params, values, refs, out);

    std::vector<std::string> args;
    std::map<std::string, std::string> config{{"k", std::to_string(o.k)},
                                              {"window", window_text(w)},
                                              {"reference", fmt_g(reference)},
                                              {"threads", std::to_string(o.common.workers())}};
    if (!o.from_file.empty()) {
        args = {"--from", o.from_file, "--k", std::to_string(o.k), "--window", window_text(w)};
        config["from"] = o.from_file;
    } else {
        std::string list;
        for (std::size_t i = 0; i < o.alphas.size(); ++i)
            list += (i ? "," : "") + fmt_g(o.alphas[i]);
        args = {"--alpha", list,
                "--N", fmt_u(o.n),
                "--k", std::to_string(o.k),
                "--window", window_text(w),
                "--beta", fmt_g(o.beta),
                "--target", fmt_g(o.target)};
        if (o.bits > 0) {
            args.push_back("--bits");
            args.push_back(std::to_string(o.bits));
        }
        config["alpha"] = list;
        config["n"] = fmt_u(o.n);
        config["beta"] = fmt_g(o.beta);
        config["precision_mode"] = o.bits > 0 ? "fixed" : "auto";
        config["precision_target"] = fmt_g(o.target);
        if (o.bits > 0) config["precision_bits"] = std::to_string(o.bits);
    }
    write_manifest(o.common, "corr", args, config);
}

// ---------------------------------------------------------------------------
// gaps: nearest-neighbour gap CDF, optionally with the correlation sandwich

struct GapsOpts {
    CommonOpts common;
    double alpha = 0.0;
    double beta = 1.0;
    std::uint64_t n = 0;
    double x_max = 3.0;
    int x_count = 60;
    double sandwich_x = 0.0;    // 0 disables
    int sandwich_k = 2;
    unsigned bits = 0;
    double target = PrecisionPolicy{}.target_abs_err;
};

void cmd_gaps(const GapsOpts& o) {
    if (o.x_count < 1) throw std::invalid_argument("--x-count must be positive");
    if (!(o.x_max > 0.0)) throw std::invalid_argument("--x-max must be positive");
    const PrecisionPolicy policy = make_policy(o.bits, o.target);
    const PointSet ps = frac_parts({o.alpha, o.beta, o.n}, policy, o.common.workers());

    std::vector<double> xs(static_cast<std::size_t>(o.x_count));
    for (int i = 0; i < o.x_count; ++i) xs[i] = o.x_max * (i + 1) / o.x_count;
    const GapDistribution dist = gap_distribution(ps, xs);
    {
        std::ofstream out = open_artifact(o.common.artifact(".csv"));
        write_gap_csv(dist, out);
    }

    if (o.sandwich_x > 0.0) {
        const SandwichBounds sb = gap_sandwich(ps, o.sandwich_x, o.sandwich_k);
        const std::uint64_t count = circular_small_gap_count(ps, o.sandwich_x);
        json j;
        j["x"] = o.sandwich_x;
        j["depth"] = o.sandwich_k;
        j["lower"] = sb.lower;
        j["upper"] = sb.upper;
        j["lower_count"] = sb.lower_count;
        j["upper_count"] = sb.upper_count;
        j["scale"] = sb.scale;
        j["small_gap_count"] = count;
        j["exp_reference"] = 1.0 - std::exp(-o.sandwich_x);
        std::ofstream out = open_artifact(o.common.artifact("_sandwich.json"));
        out << j.dump(2) << "\n";
    }

    std::vector<std::string> args{"--alpha", fmt_g(o.alpha), "--beta", fmt_g(o.beta),
                                  "--N", fmt_u(o.n),
                                  "--x-max", fmt_g(o.x_max),
                                  "--x-count", std::to_string(o.x_count),
                                  "--target", fmt_g(o.target)};
    if (o.bits > 0) {
        args.push_back("--bits");
        args.push_back(std::to_string(o.bits));
    }
    std::map<std::string, std::string> config{{"alpha", fmt_g(o.alpha)},
                                              {"beta", fmt_g(o.beta)},
                                              {"n", fmt_u(o.n)},
                                              {"x_max", fmt_g(o.x_max)},
                                              {"x_count", std::to_string(o.x_count)},
                                              {"precision_mode", o.bits > 0 ? "fixed" : "auto"},
                                              {"precision_target", fmt_g(o.target)},
                                              {"threads", std::to_string(o.common.workers())}};
    if (o.sandwich_x > 0.0) {
        args.push_back("--sandwich-x");
        args.push_back(fmt_g(o.sandwich_x));
        args.push_back("--sandwich-K");
        args.push_back(std::to_string(o.sandwich_k));
        config["sandwich_x"] = fmt_g(o.sandwich_x);
        config["sandwich_K"] = std::to_string(o.sandwich_k);
    }
    write_manifest(o.common, "gaps", args, config);
}

// ---------------------------------------------------------------------------
// fourier: exponential-sum spectrum, optionally cross-validating the pair
// correlation against its frequency-side form

struct FourierOpts {
    CommonOpts common;
    double alpha = 0.0;
    double beta = 1.0;
    std::uint64_t n = 0;
    std::uint64_t max_n = 0;
    bool validate = false;
    std::string window_spec = "gauss:1:8";
    double epsilon = 0.1;
    double target = PrecisionPolicy{}.target_abs_err;
};

void cmd_fourier(const FourierOpts& o) {
    const SequenceSpec spec{o.alpha, o.beta, o.n};
    const PrecisionPolicy policy = PrecisionPolicy::auto_target(o.target);
    if (o.max_n > 0) {
        std::ofstream out = open_artifact(o.common.artifact(".csv"));
        write_spectrum_csv(spec, policy, static_cast<long long>(o.max_n), out,
                           o.common.workers());
    }
    if (o.validate) {
        const Window w = parse_window(o.window_spec, 1);
        const PointSet ps = frac_parts(spec, policy, o.common.workers());
        const double direct = k_level_correlation(ps, w, 2, o.common.workers()).value;
        const double freq =
            r2_fourier(FourierWindow::from(w), spec, o.epsilon, policy, o.common.workers())
                .value;
        json j;
        j["direct"] = direct;
        j["fourier"] = freq;
        j["abs_diff"] = std::fabs(direct - freq);
        j["epsilon"] = o.epsilon;
        j["window"] = window_text(w);
        std::ofstream out = open_artifact(o.common.artifact("_validate.json"));
        out << j.dump(2) << "\n";
    }

    std::vector<std::string> args{"--alpha", fmt_g(o.alpha), "--beta", fmt_g(o.beta),
                                  "--N", fmt_u(o.n), "--target", fmt_g(o.target)};
    if (o.max_n > 0) {
        args.push_back("--max-n");
        args.push_back(fmt_u(o.max_n));
    }
    if (o.validate) {
        args.push_back("--validate");
        args.push_back("--window");
        args.push_back(o.window_spec);
        args.push_back("--eps");
        args.push_back(fmt_g(o.epsilon));
    }
    write_manifest(o.common, "fourier", args,
                   {{"alpha", fmt_g(o.alpha)},
                    {"beta", fmt_g(o.beta)},
                    {"n", fmt_u(o.n)},
                    {"max_n", fmt_u(o.max_n)},
                    {"validate", o.validate ? "true" : "false"},
                    {"window", o.window_spec},
                    {"epsilon", fmt_g(o.epsilon)},
                    {"precision_target", fmt_g(o.target)},
                    {"threads", std::to_string(o.common.workers())}});
}

// ---------------------------------------------------------------------------
// oscint: repulsion report for one phase, optionally with derivative curves

struct OscintOpts {
    CommonOpts common;
    std::vector<double> u, x;
    double a = 0.0;
    double n = 0.0;
    double epsilon = 0.0;
    int grid = 129;
    bool zero_counts = false;
    double tol = 1e-9;
    std::uint64_t budget = 8000000;
    bool curves = false;
    int curve_samples = 200;
};

void cmd_oscint(const OscintOpts& o) {
    const auto [phase, dropped] = canonicalize(o.u, o.x);
    const AlphaInterval J{o.a};
    const RepulsionReport report = vdc_check(phase, J, o.n, o.epsilon, o.grid, o.zero_counts,
                                             o.tol, o.budget);
    {
        std::ofstream out = open_artifact(o.common.artifact(".json"));
        write_repulsion_json({report}, out);
    }
    if (o.curves) {
        std::ofstream out = open_artifact(o.common.artifact("_curves.csv"));
        write_phase_curves_csv(phase, J, o.curve_samples, out);
    }

    std::string u_list, x_list;
    for (std::size_t i = 0; i < o.u.size(); ++i) u_list += (i ? "," : "") + fmt_g(o.u[i]);
    for (std::size_t i = 0; i < o.x.size(); ++i) x_list += (i ? "," : "") + fmt_g(o.x[i]);
    std::vector<std::string> args{"--u", u_list, "--x", x_list,
                                  "--A", fmt_g(o.a), "--N", fmt_g(o.n),
                                  "--eps", fmt_g(o.epsilon),
                                  "--grid", std::to_string(o.grid),
                                  "--tol", fmt_g(o.tol),
                                  "--budget", fmt_u(o.budget)};
    if (o.zero_counts) args.push_back("--zero-counts");
    if (o.curves) {
        args.push_back("--curves");
        args.push_back("--curve-samples");
        args.push_back(std::to_string(o.curve_samples));
    }
    write_manifest(o.common, "oscint", args,
                   {{"u", u_list},
                    {"x", x_list},
                    {"A", fmt_g(o.a)},
                    {"n", fmt_g(o.n)},
                    {"epsilon", fmt_g(o.epsilon)},
                    {"grid", std::to_string(o.grid)},
                    {"zero_counts", o.zero_counts ? "true" : "false"},
                    {"tol", fmt_g(o.tol)},
                    {"budget", fmt_u(o.budget)},
                    {"dropped_terms", std::to_string(dropped)},
                    {"threads", std::to_string(o.common.workers())}});
}

// ---------------------------------------------------------------------------
// variance: ensemble sweep over the grid with per-N checkpointing

struct VarianceOpts {
    CommonOpts common;
    double a = 0.0;
    int k = 2;
    std::vector<std::uint64_t> n_grid;
    int samples = 0;
    std::uint64_t seed = 0;
    std::string window_spec;
    double beta = 1.0;
    double span = 1.0;
};

bool same_plan(const ExperimentPlan& a, const ExperimentPlan& b) {
    return a.k == b.k && a.J.A == b.J.A && a.N_grid == b.N_grid && a.samples == b.samples &&
           a.seed == b.seed && a.beta == b.beta && a.alpha_span == b.alpha_span &&
           a.window.kind == b.window.kind && a.window.dimension == b.window.dimension &&
           a.window.sigma == b.window.sigma && a.window.radius == b.window.radius &&
           a.window.order == b.window.order && a.window.dilation == b.window.dilation &&
           a.window.lo == b.window.lo && a.window.hi == b.window.hi;
}

void cmd_variance(const VarianceOpts& o) {
    ExperimentPlan plan;
    plan.k = o.k;
    plan.J = AlphaInterval{o.a};
    plan.N_grid = o.n_grid;
    plan.samples = o.samples;
    plan.seed = o.seed;
    plan.beta = o.beta;
    plan.alpha_span = o.span;
    if (o.window_spec.empty()) {
        const double sigma = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
        plan.window = Window::gaussian(sigma, 8.0 * sigma, o.k - 1);
    } else {
        plan.window = parse_window(o.window_spec, o.k - 1);
    }
    plan.validate();

    const auto start = std::chrono::steady_clock::now();
    const fs::path checkpoint = o.common.artifact(".checkpoint.json");

    // rows finished in an earlier interrupted run are trusted only when the
    // stored plan matches this one exactly
    std::map<std::uint64_t, std::pair<ExpectationEstimate, VarianceEstimate>> done;
    if (fs::exists(checkpoint)) {
        try {
            std::ifstream in(checkpoint);
            const json j = json::parse(in);
            std::istringstream plan_text(j.dump());
            if (same_plan(read_plan_json(plan_text), plan)) {
                for (const json& row : j.at("estimates")) {
                    if (!row.contains("variance")) continue;
                    ExpectationEstimate e;
                    e.mean = row.at("mean").get<double>();
                    e.std_error = row.at("std_error").get<double>();
                    e.reference = row.at("reference").get<double>();
                    VarianceEstimate v;
                    v.var = row.at("variance").get<double>();
                    v.std_error = row.at("variance_std_error").get<double>();
                    done[row.at("n").get<std::uint64_t>()] = {e, v};
                }
            }
        } catch (const std::exception&) {
            done.clear();      // unreadable checkpoint: recompute everything
        }
    }

    ExperimentResult result;
    result.plan = plan;
    for (std::uint64_t N : plan.N_grid) {
        if (!done.count(N)) {
            const ExpectationEstimate e = expectation_estimate(plan, N, o.common.workers());
            const VarianceEstimate v = variance_estimate(plan, N, o.common.workers());
            done[N] = {e, v};

            ExperimentResult partial;
            partial.plan = plan;
            for (std::uint64_t M : plan.N_grid) {
                if (!done.count(M)) break;
                partial.expectation.push_back(done[M].first);
                partial.variance.push_back(done[M].second);
            }
            std::ofstream out = open_artifact(checkpoint);
            write_experiment_json(partial, out);
        }
        result.expectation.push_back(done[N].first);
        result.variance.push_back(done[N].second);
    }

    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (std::size_t g = 0; g < plan.N_grid.size(); ++g)
        pairs.emplace_back(plan.N_grid[g], result.variance[g].var);
    bool fittable = pairs.size() >= 3;
    for (const auto& p : pairs)
        if (!(p.second > 0.0)) fittable = false;
    if (fittable) result.fit = decay_fit(pairs);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
        std::ofstream out = open_artifact(o.common.artifact(".csv"));
        write_variance_csv(result, out);
    }
    {
        std::ofstream out = open_artifact(o.common.artifact(".json"));
        write_experiment_json(result, out);
    }
    fs::remove(checkpoint);

    std::string grid_list;
    for (std::size_t i = 0; i < o.n_grid.size(); ++i)
        grid_list += (i ? "," : "") + fmt_u(o.n_grid[i]);
    const std::vector<std::string> args{"--A", fmt_g(o.a),
                                        "--k", std::to_string(o.k),
                                        "--N-grid", grid_list,
                                        "--samples", std::to_string(o.samples),
                                        "--seed", fmt_u(o.seed),
                                        "--window", window_text(plan.window),
                                        "--beta", fmt_g(o.beta),
                                        "--span", fmt_g(o.span)};
    write_manifest(o.common, "variance", args,
                   {{"A", fmt_g(o.a)},
                    {"k", std::to_string(o.k)},
                    {"n_grid", grid_list},
                    {"samples", std::to_string(o.samples)},
                    {"seed", fmt_u(o.seed)},
                    {"window", window_text(plan.window)},
                    {"beta", fmt_g(o.beta)},
                    {"alpha_span", fmt_g(o.span)},
                    {"precision_target", fmt_g(PrecisionPolicy{}.target_abs_err)},
                    {"precision_reference_n", fmt_u(plan.reference_n())},
                    {"threads", std::to_string(o.common.workers())}});
}

// ---------------------------------------------------------------------------
// report: merge manifests into one summary table

struct ReportOpts {
    CommonOpts common;
    std::vector<std::string> inputs;
};

void cmd_report(const ReportOpts& o) {
    std::ofstream out = open_artifact(o.common.artifact(".csv"));
    out << "file,subcommand,config\n";
    for (const std::string& file : o.inputs) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot read manifest " + file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw IoError("manifest " + file + " is not valid JSON: " + e.what());
        }
        const std::string sub = j.value("subcommand", "");
        std::string flat;
        if (j.contains("config"))
            for (const auto& [key, value] : j.at("config").items()) {
                if (!flat.empty()) flat += ";";
                flat += key + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
            }
        out << file << "," << sub << ",\"" << flat << "\"\n";
    }
    if (!out) throw IoError("failed writing report");
    std::string list;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) list += (i ? "," : "") + o.inputs[i];
    write_manifest(o.common, "report", {"--inputs", list},
                   {{"inputs", list}, {"threads", std::to_string(o.common.workers())}});
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& raw_args, int depth) {
    CLI::App app{"numerical laboratory for fine-scale statistics of beta * n^alpha mod 1"};
    app.require_subcommand(0, 1);

    std::string from_manifest;
    std::string top_outdir, top_out;
    int top_threads = 0;
    app.add_option("--from-manifest", from_manifest, "replay the argument list stored in a manifest");
    app.add_option("--outdir", top_outdir, "output directory for the replayed run");
    app.add_option("--out", top_out, "artifact basename for the replayed run");
    app.add_option("--threads", top_threads, "worker threads for the replayed run");
    app.set_version_flag("--version", version());

    GenOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "evaluate a sequence and store the point set");
    add_common(gen_cmd, gen.common, "gen");
    gen_cmd->add_option("--alpha", gen.alpha, "exponent")->required();
    gen_cmd->add_option("--beta", gen.beta, "prefactor");
    gen_cmd->add_option("--N", gen.n, "number of points")->required();
    gen_cmd->add_option("--bits", gen.bits, "fixed working precision (default: auto)");
    gen_cmd->add_option("--target", gen.target, "certified absolute error target");
    gen_cmd->add_flag("--text", gen.text, "also dump decimal values, one per line");

    CorrOpts corr;
    std::string corr_alpha_list;
    CLI::App* corr_cmd = app.add_subcommand("corr", "k-level correlation sums");
    add_common(corr_cmd, corr.common, "corr");
    corr_cmd->add_option("--alpha", corr_alpha_list, "exponent, or comma list for a sweep");
    corr_cmd->add_option("--from", corr.from_file, "stored point set instead of generating");
    corr_cmd->add_option("--beta", corr.beta, "prefactor");
    corr_cmd->add_option("--N", corr.n, "number of points");
    corr_cmd->add_option("--k", corr.k, "correlation level");
    corr_cmd->add_option("--window", corr.window_spec, "box:a:b | gauss:s:r | bump:r:p | simplex:x")
        ->required();
    corr_cmd->add_option("--bits", corr.bits, "fixed working precision (default: auto)");
    corr_cmd->add_option("--target", corr.target, "certified absolute error target");

    GapsOpts gaps;
    CLI::App* gaps_cmd = app.add_subcommand("gaps", "nearest-neighbour gap distribution");
    add_common(gaps_cmd, gaps.common, "gaps");
    gaps_cmd->add_option("--alpha", gaps.alpha, "exponent")->required();
    gaps_cmd->add_option("--beta", gaps.beta, "prefactor");
    gaps_cmd->add_option("--N", gaps.n, "number of points")->required();
    gaps_cmd->add_option("--x-max", gaps.x_max, "largest scaled gap on the grid");
    gaps_cmd->add_option("--x-count", gaps.x_count, "grid points");
    gaps_cmd->add_option("--sandwich-x", gaps.sandwich_x, "also bracket the strict gap count at x");
    gaps_cmd->add_option("--sandwich-K", gaps.sandwich_k, "sandwich depth");
    gaps_cmd->add_option("--bits", gaps.bits, "fixed working precision (default: auto)");
    gaps_cmd->add_option("--target", gaps.target, "certified absolute error target");

    FourierOpts fourier;
    CLI::App* fourier_cmd = app.add_subcommand("fourier", "exponential-sum spectra");
    add_common(fourier_cmd, fourier.common, "fourier");
    fourier_cmd->add_option("--alpha", fourier.alpha, "exponent")->required();
    fourier_cmd->add_option("--beta", fourier.beta, "prefactor");
    fourier_cmd->add_option("--N", fourier.n, "number of points")->required();
    fourier_cmd->add_option("--max-n", fourier.max_n, "spectrum frequencies 0..max-n");
    fourier_cmd->add_flag("--validate", fourier.validate,
                          "cross-check the pair correlation against its frequency form");
    fourier_cmd->add_option("--window", fourier.window_spec, "window for --validate");
    fourier_cmd->add_option("--eps", fourier.epsilon, "frequency cutoff exponent for --validate");
    fourier_cmd->add_option("--target", fourier.target, "certified absolute error target");

    OscintOpts oscint;
    std::string u_list, x_list;
    CLI::App* oscint_cmd = app.add_subcommand("oscint", "phase repulsion report");
    add_common(oscint_cmd, oscint.common, "oscint");
    oscint_cmd->add_option("--u", u_list, "phase coefficients, comma separated")->required();
    oscint_cmd->add_option("--x", x_list, "phase bases, comma separated")->required();
    oscint_cmd->add_option("--A", oscint.a, "left endpoint of the unit exponent interval")
        ->required();
    oscint_cmd->add_option("--N", oscint.n, "scale the repulsion bound is taken at")->required();
    oscint_cmd->add_option("--eps", oscint.epsilon, "repulsion exponent epsilon");
    oscint_cmd->add_option("--grid", oscint.grid, "derivative scan grid size");
    oscint_cmd->add_flag("--zero-counts", oscint.zero_counts, "count derivative zeros per order");
    oscint_cmd->add_option("--tol", oscint.tol, "integration tolerance");
    oscint_cmd->add_option("--budget", oscint.budget, "integration panel budget");
    oscint_cmd->add_flag("--curves", oscint.curves, "dump derivative curves over the interval");
    oscint_cmd->add_option("--curve-samples", oscint.curve_samples, "curve grid size");

    VarianceOpts variance;
    std::string grid_list;
    CLI::App* variance_cmd = app.add_subcommand("variance", "ensemble variance sweep over alpha");
    add_common(variance_cmd, variance.common, "variance");
    variance_cmd->add_option("--A", variance.a, "left endpoint of the exponent interval")
        ->required();
    variance_cmd->add_option("--k", variance.k, "correlation level");
    variance_cmd->add_option("--N-grid", grid_list, "comma list of N, strictly increasing")
        ->required();
    variance_cmd->add_option("--samples", variance.samples, "alpha draws per N")->required();
    variance_cmd->add_option("--seed", variance.seed, "stream seed");
    variance_cmd->add_option("--window", variance.window_spec,
                             "smooth window (default: unit-mass gaussian, radius 8 sigma)");
    variance_cmd->add_option("--beta", variance.beta, "prefactor");
    variance_cmd->add_option("--span", variance.span, "draw width inside the interval, in [0,1]");

    ReportOpts report;
    std::string inputs_list;
    CLI::App* report_cmd = app.add_subcommand("report", "merge manifests into a summary table");
    add_common(report_cmd, report.common, "report");
    report_cmd->add_option("--inputs", inputs_list, "comma list of manifest files")->required();

    try {
        std::vector<std::string> args(raw_args.rbegin(), raw_args.rend());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    if (!from_manifest.empty()) {
        if (depth > 0) throw std::invalid_argument("manifests cannot chain --from-manifest");
        std::ifstream in(from_manifest);
        if (!in) throw IoError("cannot read manifest " + from_manifest);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw IoError("manifest is not valid JSON: " + std::string(e.what()));
        }
        if (!j.contains("argv")) throw IoError("manifest has no argv to replay");
        std::vector<std::string> replay = j.at("argv").get<std::vector<std::string>>();
        if (!top_outdir.empty()) {
            replay.push_back("--outdir");
            replay.push_back(top_outdir);
        }
        if (!top_out.empty()) {
            replay.push_back("--out");
            replay.push_back(top_out);
        }
        if (top_threads > 0) {
            replay.push_back("--threads");
            replay.push_back(std::to_string(top_threads));
        }
        return run_cli(replay, depth + 1);
    }

    if (gen_cmd->parsed()) {
        cmd_gen(gen);
    } else if (corr_cmd->parsed()) {
        if (corr.from_file.empty()) {
            if (corr_alpha_list.empty())
                throw std::invalid_argument("corr needs --alpha or --from");
            if (corr.n == 0) throw std::invalid_argument("corr needs --N with --alpha");
            corr.alphas = parse_doubles(corr_alpha_list);
        } else if (!corr_alpha_list.empty()) {
            throw std::invalid_argument("corr takes --alpha or --from, not both");
        }
        cmd_corr(corr);
    } else if (gaps_cmd->parsed()) {
        cmd_gaps(gaps);
    } else if (fourier_cmd->parsed()) {
        if (fourier.max_n == 0 && !fourier.validate)
            throw std::invalid_argument("fourier needs --max-n or --validate");
        cmd_fourier(fourier);
    } else if (oscint_cmd->parsed()) {
        oscint.u = parse_doubles(u_list);
        oscint.x = parse_doubles(x_list);
        cmd_oscint(oscint);
    } else if (variance_cmd->parsed()) {
        variance.n_grid = parse_counts(grid_list);
        cmd_variance(variance);
    } else if (report_cmd->parsed()) {
        report.inputs = split_on(inputs_list, ',');
        cmd_report(report);
    } else {
        std::cerr << app.help();
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args, 0);
    } catch (const PrecisionError& e) {
        std::cerr << "precision infeasible: " << e.what() << "\n";
        return 3;
    } catch (const ToleranceError& e) {
        std::cerr << "tolerance not met: " << e.what() << "\n";
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 5;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
