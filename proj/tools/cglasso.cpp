// Command-line front end: simulate, fit, stars, bench.
//
// Exit codes: 0 success, 2 usage error, 3 convergence failure, 4 no stable lambda.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cglasso/cglasso.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cglasso;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitNoStable = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalFlags {
    unsigned long long seed = 0;
    int threads = 1;
};

int default_threads() {
    if (const char* env = std::getenv("CGLASSO_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
        }
    }
    return 1;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::string fmt(double v) { return io::format_double(v); }

// ---------------------------------------------------------------- ingest

struct IngestFlags {
    std::string data;
    double prevalence_min = 0.05;
    std::string reference = "auto";
    long long min_depth = 100;

    void add(CLI::App* app) {
        app->add_option("--data", data, "Count table TSV (taxa in columns, samples in rows)")->required();
        app->add_option("--prevalence-min", prevalence_min, "Drop taxa non-zero in fewer than this fraction of samples")
            ->capture_default_str();
        app->add_option("--reference", reference, "Reference taxon name, or 'auto' (largest mean relative abundance)")
            ->capture_default_str();
        app->add_option("--min-depth", min_depth, "Drop samples with fewer total counts")->capture_default_str();
    }

    CountTable load() const {
        return ingest_file(data, IngestOptions{prevalence_min, reference, static_cast<std::int64_t>(min_depth)});
    }

    json to_json() const {
        return {{"prevalence_min", prevalence_min}, {"reference", reference}, {"min_depth", min_depth}};
    }
};

int cmd_ingest(const IngestFlags& inf, const std::string& out_dir, const GlobalFlags& g) {
    const io::RawCountTable raw = io::read_count_table_file(inf.data);
    const CountTable x = ingest(raw, IngestOptions{inf.prevalence_min, inf.reference,
                                                   static_cast<std::int64_t>(inf.min_depth)});
    const fs::path out = prepare_out_dir(out_dir);
    std::ostringstream counts;
    io::write_count_table(counts, x);
    write_text(out / "counts.tsv", counts.str());

    const auto kept_taxa = x.original_taxa();
    const std::set<std::string> taxa_set(kept_taxa.begin(), kept_taxa.end());
    const std::set<std::string> sample_set(x.sample_ids().begin(), x.sample_ids().end());
    json dropped_taxa = json::array();
    json dropped_samples = json::array();
    for (const auto& t : raw.taxa)
        if (!taxa_set.count(t)) dropped_taxa.push_back(t);
    for (const auto& s : raw.sample_ids)
        if (!sample_set.count(s)) dropped_samples.push_back(s);
    write_json(out / "ingest.json", {{"reference", x.reference_name()},
                                     {"num_samples", x.num_samples()},
                                     {"num_taxa", kept_taxa.size()},
                                     {"dropped_taxa", dropped_taxa},
                                     {"dropped_samples", dropped_samples}});

    cli::RunManifest m;
    m.subcommand = "ingest";
    m.seed = g.seed;
    m.options = inf.to_json();
    m.add_input("data", inf.data);
    write_json(out / "manifest.json", m.to_json());
    return kExitOk;
}

// ---------------------------------------------------------------- estimator flags

struct EstimatorFlags {
    std::string method = "cgl";
    double pseudocount = 0.5;
    std::string rule = "or";
    bool no_penalize_diagonal = false;
    int lambda_count = 70;
    double lambda_min_ratio = 0.01;
    double outer_tol = 1e-5;
    int max_outer_iter = 100;
    std::optional<double> stationarity_tol;

    void add(CLI::App* app, bool with_method = true) {
        if (with_method)
            app->add_option("--method", method, "Estimator")
                ->check(CLI::IsMember({"cgl", "glasso", "mb"}))
                ->capture_default_str();
        app->add_option("--pseudocount", pseudocount, "Value substituted for zero counts in log-ratios")
            ->capture_default_str();
        app->add_option("--rule", rule, "Neighborhood-selection edge rule")
            ->check(CLI::IsMember({"and", "or"}))
            ->capture_default_str();
        app->add_flag("--no-penalize-diagonal", no_penalize_diagonal, "Leave the diagonal of Omega unpenalized");
        app->add_option("--lambda-count", lambda_count, "Number of log-spaced lambdas from lambda_max down")
            ->capture_default_str();
        app->add_option("--lambda-min-ratio", lambda_min_ratio, "Smallest lambda as a fraction of lambda_max")
            ->capture_default_str();
        app->add_option("--outer-tol", outer_tol, "CGL relative objective tolerance")->capture_default_str();
        app->add_option("--max-outer-iter", max_outer_iter, "CGL maximum outer iterations")->capture_default_str();
        app->add_option("--stationarity-tol", stationarity_tol,
                        "CGL: also require every per-sample log-ratio gradient below this before stopping");
    }

    EstimatorOptions options() const {
        EstimatorOptions o;
        o.pseudocount = pseudocount;
        o.glasso.penalize_diagonal = !no_penalize_diagonal;
        o.cgl.glasso = o.glasso;
        o.cgl.outer_tol = outer_tol;
        o.cgl.max_outer_iter = max_outer_iter;
        o.cgl.stationarity_tol = stationarity_tol;
        o.mb.rule = rule == "and" ? MbRule::and_rule : MbRule::or_rule;
        return o;
    }

    json to_json(bool with_method = true) const {
        json j = {{"pseudocount", pseudocount},
                  {"rule", rule},
                  {"penalize_diagonal", !no_penalize_diagonal},
                  {"lambda_count", lambda_count},
                  {"lambda_min_ratio", lambda_min_ratio},
                  {"outer_tol", outer_tol},
                  {"max_outer_iter", max_outer_iter}};
        j["stationarity_tol"] = stationarity_tol ? json(*stationarity_tol) : json(nullptr);
        if (with_method) j["method"] = method;
        return j;
    }
};

// ---------------------------------------------------------------- simulation flags

struct SimFlags {
    std::string network = "chain";
    long long K = 200;
    long long n = 100;
    double c = 1.0;
    std::optional<long long> depth_low;
    std::optional<long long> depth_high;
    std::string preset;
    bool desk = false;
    CLI::Option* k_opt = nullptr;

    void add(CLI::App* app) {
        app->add_option("--network", network, "True network type")
            ->check(CLI::IsMember({"chain", "random", "hub"}))
            ->capture_default_str();
        k_opt = app->add_option("--K", K, "Number of non-reference taxa")->capture_default_str();
        app->add_option("--n", n, "Number of samples")->capture_default_str();
        app->add_option("--c", c, "Compositional variation: latent precision is c * Omega (1 low, 0.2 high)")
            ->capture_default_str();
        app->add_option("--depth-low", depth_low, "Smallest sequencing depth (default 20 x K)");
        app->add_option("--depth-high", depth_high, "Largest sequencing depth (default 40 x K)");
        std::vector<std::string> names;
        for (const auto& p : kDepthPresets) names.emplace_back(p.name);
        app->add_option("--preset", preset, "Depth range preset, in multiples of K: dense-low 20-40, dense-high 100-200, sparse-1 8-16, sparse-2 4-8, sparse-3 2-4, sparse-4 1-2")->check(CLI::IsMember(names));
        app->add_flag("--desk", desk, "Desk-scale run: n=100, K=50");
    }

    SimConfig config(std::uint64_t seed) const {
        if (!preset.empty() && (depth_low || depth_high))
            throw UsageError("--preset cannot be combined with --depth-low/--depth-high");
        if (desk && k_opt && k_opt->count() > 0) throw UsageError("--desk cannot be combined with --K");
        if (depth_low.has_value() != depth_high.has_value())
            throw UsageError("--depth-low and --depth-high must be given together");
        SimConfig cfg;
        cfg.network = parse_network_type(network);
        cfg.K = desk ? 50 : K;
        cfg.n = desk ? 100 : n;
        cfg.variation = c;
        cfg.seed = seed;
        std::int64_t lo = 20, hi = 40;
        if (!preset.empty()) {
            for (const auto& p : kDepthPresets)
                if (preset == p.name) lo = p.low_per_k, hi = p.high_per_k;
        }
        cfg.depth_low = depth_low ? *depth_low : lo * cfg.K;
        cfg.depth_high = depth_high ? *depth_high : hi * cfg.K;
        try {
            cfg.validate();
        } catch (const ArgumentError& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

json config_json(const SimConfig& cfg) {
    return {{"network", to_string(cfg.network)}, {"K", cfg.K},
            {"n", cfg.n},  {"c", cfg.variation},
            {"depth_low", cfg.depth_low}, {"depth_high", cfg.depth_high},
            {"seed", cfg.seed}};
}

// ---------------------------------------------------------------- output helpers

void write_adjacency(const fs::path& path, const Adjacency& adj) {
    std::ostringstream out;
    out << "taxon";
    for (Index k = 0; k < adj.dim(); ++k) out << '\t' << adj.name(k);
    out << '\n';
    for (Index k = 0; k < adj.dim(); ++k) {
        out << adj.name(k);
        for (Index l = 0; l < adj.dim(); ++l) out << '\t' << (adj(k, l) ? 1 : 0);
        out << '\n';
    }
    write_text(path, out.str());
}

void write_edges(const fs::path& path, const std::vector<EdgeRecord>& edges) {
    std::ostringstream out;
    out << "taxon_a\ttaxon_b\tselection_probability\tweight\n";
    for (const auto& e : edges)
        out << e.taxon_a << '\t' << e.taxon_b << '\t' << fmt(e.selection_probability) << '\t' << fmt(e.weight) << '\n';
    write_text(path, out.str());
}

void write_degrees(const fs::path& path, const Adjacency& adj) {
    std::ostringstream out;
    out << "taxon\tdegree\trank\n";
    for (const auto& d : degree_ranks(adj)) out << d.taxon << '\t' << d.degree << '\t' << d.rank << '\n';
    write_text(path, out.str());
}

std::vector<EdgeRecord> edge_records(const Adjacency& adj, const std::optional<Matrix>& omega,
                                     const std::optional<Matrix>& probability) {
    std::optional<Matrix> weights;
    if (omega) weights = partial_correlations(PrecisionMatrix(*omega));
    std::vector<EdgeRecord> out;
    for (Index l = 0; l < adj.dim(); ++l)
        for (Index k = 0; k < l; ++k)
            if (adj(k, l))
                out.emplace_back(adj.name(k), adj.name(l), probability ? (*probability)(k, l) : 1.0,
                                 weights ? (*weights)(k, l) : 0.0);
    return out;
}

void write_omega(const fs::path& path, const Matrix& omega, const std::vector<std::string>& names) {
    std::ostringstream out;
    io::write_matrix(out, omega, names, names, "taxon");
    write_text(path, out.str());
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const SimFlags& flags, const std::string& out_dir, const GlobalFlags& g) {
    const SimConfig cfg = flags.config(g.seed);
    const PrecisionMatrix omega = make_precision(cfg.network, cfg.K, cfg.seed);
    const SimulatedData data = generate_dataset(omega, cfg);
    const fs::path out = prepare_out_dir(out_dir);

    std::ostringstream counts;
    io::write_count_table(counts, data.counts);
    write_text(out / "counts.tsv", counts.str());

    const auto names = data.counts.network_taxa();
    write_omega(out / "truth_omega.tsv", omega.matrix(), names);
    std::ostringstream z;
    io::write_matrix(z, data.z, data.counts.sample_ids(), names, "sample");
    write_text(out / "truth_z.tsv", z.str());

    const Adjacency truth = Adjacency::from_precision(omega.matrix(), names);
    json edges = json::array();
    for (Index l = 0; l < truth.dim(); ++l)
        for (Index k = 0; k < l; ++k)
            if (truth(k, l)) edges.push_back({truth.name(k), truth.name(l)});
    write_json(out / "truth.json", {{"config", config_json(cfg)},
                                    {"reference", data.counts.reference_name()},
                                    {"num_edges", truth.num_edges()},
                                    {"edges", edges}});

    cli::RunManifest m;
    m.subcommand = "simulate";
    m.options = config_json(cfg);
    m.seed = g.seed;
    write_json(out / "manifest.json", m.to_json());
    return kExitOk;
}

// ---------------------------------------------------------------- fit

std::vector<double> resolve_lambdas(const CountTable& x, Method method, const EstimatorFlags& ef,
                                    std::optional<double> single) {
    if (single) return {*single};
    const double lmax = lambda_max(x, method, ef.pseudocount);
    return lambda_grid(lmax, ef.lambda_count, ef.lambda_min_ratio);
}

int cmd_fit(const IngestFlags& inf, const EstimatorFlags& ef, std::optional<double> lambda, const std::string& gold,
            const std::string& out_dir, const GlobalFlags& g) {
    const CountTable x = inf.load();
    const Method method = parse_method(ef.method);
    EstimatorOptions opts = ef.options();
    opts.cgl.threads = g.threads;
    opts.cgl.seed = g.seed;
    opts.mb.threads = g.threads;
    const auto lambdas = resolve_lambdas(x, method, ef, lambda);
    const fs::path out = prepare_out_dir(out_dir);

    int status = kExitOk;
    std::vector<PathNetwork> path;
    try {
        path = network_path(x, method, lambdas, opts);
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    }

    std::ostringstream summary;
    summary << "lambda_index\tlambda\tnum_edges\tobjective\titerations\tconverged\terror\n";
    std::ostringstream trace;
    trace << "lambda_index\tlambda\titeration\tobjective\n";
    std::ostringstream path_edges;
    path_edges << "lambda_index\tlambda\ttaxon_a\ttaxon_b\tweight\n";
    json fits = json::array();
    std::vector<Adjacency> networks;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& p = path[i];
        networks.push_back(p.network);
        if (!p.error.empty()) {
            status = kExitConvergence;
            std::cerr << "convergence failure: " << p.error << "\n";
        }
        summary << i << '\t' << fmt(p.lambda) << '\t' << p.network.num_edges() << '\t'
                << (p.cgl_fit ? fmt(p.cgl_fit->objective_trace.back()) : "NA") << '\t'
                << (p.cgl_fit ? std::to_string(p.cgl_fit->iterations) : "NA") << '\t'
                << (p.cgl_fit ? (p.cgl_fit->converged ? "1" : "0") : "NA") << '\t'
                << (p.error.empty() ? "" : p.error) << '\n';
        json entry = {{"lambda", p.lambda}, {"num_edges", p.network.num_edges()}};
        if (p.cgl_fit) {
            const auto& f = *p.cgl_fit;
            for (std::size_t t = 0; t < f.objective_trace.size(); ++t)
                trace << i << '\t' << fmt(p.lambda) << '\t' << t << '\t' << fmt(f.objective_trace[t]) << '\n';
            entry["iterations"] = f.iterations;
            entry["converged"] = f.converged;
            entry["objective"] = f.objective_trace.back();
            entry["certificate"] = {{"max_z_gradient", f.certificate.max_z_gradient},
                                    {"mu_residual", f.certificate.mu_residual},
                                    {"omega_residual", f.certificate.omega_residual}};
        }
        if (!p.error.empty()) entry["error"] = p.error;
        fits.push_back(entry);
        for (const auto& e : edge_records(p.network, p.omega, std::nullopt))
            path_edges << i << '\t' << fmt(p.lambda) << '\t' << e.taxon_a << '\t' << e.taxon_b << '\t' << fmt(e.weight)
                       << '\n';
    }
    write_text(out / "path.tsv", summary.str());
    write_text(out / "path_edges.tsv", path_edges.str());
    if (method == Method::cgl) write_text(out / "trace.tsv", trace.str());

    // the densest network of the path (or the only one) gets the full set of tables
    const auto& last = path.back();
    if (last.omega) write_omega(out / "omega.tsv", *last.omega, x.network_taxa());
    write_adjacency(out / "adjacency.tsv", last.network);
    write_edges(out / "edges.tsv", rank_edges(edge_records(last.network, last.omega, std::nullopt), SIZE_MAX));
    write_degrees(out / "degrees.tsv", last.network);

    cli::RunManifest m;
    m.subcommand = "fit";
    m.seed = g.seed;
    m.options = ef.to_json();
    m.options["ingest"] = inf.to_json();
    if (lambda) m.options["lambda"] = *lambda;
    m.add_input("data", inf.data);
    if (!gold.empty()) {
        std::ifstream gin(gold);
        if (!gin) throw UsageError("cannot open gold edge list: " + gold);
        const auto gold_edges = io::read_edge_list(gin, gold);
        const auto curve = literature_overlap_curve(networks, gold_edges);
        std::ostringstream ov;
        ov << "lambda_index\tlambda\tnum_edges\tnum_gold_hits\n";
        for (std::size_t i = 0; i < curve.size(); ++i)
            ov << i << '\t' << fmt(lambdas[i]) << '\t' << curve[i].num_edges << '\t' << curve[i].num_gold_hits << '\n';
        write_text(out / "overlap.tsv", ov.str());
        m.add_input("gold", gold);
    }
    write_json(out / "fit.json", {{"method", ef.method},
                                  {"reference", x.reference_name()},
                                  {"num_samples", x.num_samples()},
                                  {"taxa", x.network_taxa()},
                                  {"fits", fits}});
    write_json(out / "manifest.json", m.to_json());
    return status;
}

// ---------------------------------------------------------------- stars

struct StarsFlags {
    double beta = 0.05;
    std::optional<long long> subsample_size;
    int num_subsamples = 50;
    bool no_monotonize = false;
    std::size_t top_m = 100;

    void add(CLI::App* app) {
        app->add_option("--beta", beta, "Instability threshold")->capture_default_str();
        app->add_option("--subsample-size", subsample_size, "Subsample size b (default floor(7 sqrt(n)))");
        app->add_option("--num-subsamples", num_subsamples, "Number of subsamples N")->capture_default_str();
        app->add_flag("--no-monotonize", no_monotonize, "Use the raw instability curve");
        app->add_option("--top-m", top_m, "Edges kept in the ranked edge list")->capture_default_str();
    }

    StarsOptions options(std::uint64_t seed, int threads) const {
        StarsOptions o;
        o.beta = beta;
        if (subsample_size) o.subsample_size = static_cast<Index>(*subsample_size);
        o.num_subsamples = num_subsamples;
        o.seed = seed;
        o.monotonize = !no_monotonize;
        o.threads = threads;
        return o;
    }

    json to_json() const {
        json j = {{"beta", beta}, {"num_subsamples", num_subsamples}, {"monotonize", !no_monotonize}, {"top_m", top_m}};
        j["subsample_size"] = subsample_size ? json(*subsample_size) : json(nullptr);
        return j;
    }
};

int cmd_stars(const IngestFlags& inf, const EstimatorFlags& ef, const StarsFlags& sf, const std::string& out_dir,
              const GlobalFlags& g) {
    const CountTable x = inf.load();
    const Method method = parse_method(ef.method);
    const EstimatorOptions opts = ef.options();
    const auto lambdas = resolve_lambdas(x, method, ef, std::nullopt);
    StarsOptions so = sf.options(g.seed, g.threads);
    try {
        so.validate(x.num_samples());
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    StarsResult r;
    try {
        r = stars_select(x, method, lambdas, so, opts);
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    }
    const fs::path out = prepare_out_dir(out_dir);

    std::ostringstream curve;
    curve << "lambda\tinstability\tinstability_monotone\tmean_edges\n";
    for (std::size_t l = 0; l < r.lambdas.size(); ++l)
        curve << fmt(r.lambdas[l]) << '\t' << fmt(r.instability[l]) << '\t' << fmt(r.instability_monotone[l]) << '\t'
              << fmt(r.frequencies[l].sum() / 2.0) << '\n';
    write_text(out / "instability.tsv", curve.str());

    json summary = {{"method", ef.method},
                    {"reference", x.reference_name()},
                    {"num_samples", x.num_samples()},
                    {"subsample_size", so.resolved_subsample_size(x.num_samples())},
                    {"stable", r.stable}};
    if (r.stable) {
        summary["selected_lambda"] = r.selected_lambda;
        summary["selected_index"] = r.selected_index;
        summary["num_edges"] = r.selected_network.num_edges();
        write_adjacency(out / "network.tsv", r.selected_network);
        if (r.selected_omega) write_omega(out / "omega.tsv", *r.selected_omega, x.network_taxa());
        write_edges(out / "edges.tsv",
                    rank_edges(edge_records(r.selected_network, r.selected_omega, r.frequencies[r.selected_index]),
                               sf.top_m));
        write_degrees(out / "degrees.tsv", r.selected_network);
    }
    write_json(out / "stars.json", summary);

    cli::RunManifest m;
    m.subcommand = "stars";
    m.seed = g.seed;
    m.options = ef.to_json();
    m.options["ingest"] = inf.to_json();
    m.options["stars"] = sf.to_json();
    m.add_input("data", inf.data);
    write_json(out / "manifest.json", m.to_json());
    if (!r.stable) {
        std::cerr << "no lambda met the instability threshold " << sf.beta << "\n";
        return kExitNoStable;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
    int replicates = 100;
    int stars_replicates = 50;
    std::vector<std::string> methods{"cgl", "glasso", "mb"};

    void add(CLI::App* app) {
        app->add_option("--replicates", replicates, "Replicates for ROC curves")->capture_default_str();
        app->add_option("--stars-replicates", stars_replicates, "Replicates for StARS metrics (0 to skip)")
            ->capture_default_str();
        app->add_option("--methods", methods, "Estimators to compare")
            ->delimiter(',')
            ->check(CLI::IsMember({"cgl", "glasso", "mb"}));
    }
};

struct ReplicateResult {
    std::map<std::string, std::vector<PathNetwork>> paths;
    std::map<std::string, RocCurve> roc;
    std::map<std::string, std::optional<Confusion>> stars;
    std::map<std::string, double> stars_lambda;
    std::map<std::string, Index> stars_edges;
    std::string error;
};

int cmd_bench(const SimFlags& sim, const EstimatorFlags& ef, const StarsFlags& sf, const BenchFlags& bf,
              const std::string& out_dir, const GlobalFlags& g) {
    const SimConfig base = sim.config(g.seed);
    const EstimatorOptions opts = ef.options();
    const int total = std::max(bf.replicates, bf.stars_replicates);
    std::vector<ReplicateResult> results(static_cast<std::size_t>(total));
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < total; ++r) seeds.push_back(derive_seed(g.seed, static_cast<std::uint64_t>(r)));

    parallel_for(results.size(), g.threads, [&](std::size_t r) {
        auto& res = results[r];
        try {
            SimConfig cfg = base;
            cfg.seed = seeds[r];
            const PrecisionMatrix omega = make_precision(cfg.network, cfg.K, cfg.seed);
            const SimulatedData data = generate_dataset(omega, cfg);
            const Adjacency truth = Adjacency::from_precision(omega.matrix(), data.counts.network_taxa());
            for (const auto& name : bf.methods) {
                const Method method = parse_method(name);
                const auto lambdas = resolve_lambdas(data.counts, method, ef, std::nullopt);
                if (static_cast<int>(r) < bf.replicates) {
                    auto path = network_path(data.counts, method, lambdas, opts);
                    std::vector<Adjacency> nets;
                    for (const auto& p : path) {
                        if (!p.error.empty()) throw Error(name + ": " + p.error);
                        nets.push_back(p.network);
                    }
                    res.roc[name] = roc_points(nets, truth);
                }
                if (static_cast<int>(r) < bf.stars_replicates) {
                    const StarsResult s = stars_select(data.counts, method, lambdas, sf.options(cfg.seed, 1), opts);
                    if (s.stable) {
                        res.stars[name] = edge_confusion(s.selected_network, truth);
                        res.stars_lambda[name] = s.selected_lambda;
                        res.stars_edges[name] = s.selected_network.num_edges();
                    } else {
                        res.stars[name] = std::nullopt;
                    }
                }
            }
        } catch (const std::exception& e) {
            res.error = e.what();
        }
    });

    const fs::path out = prepare_out_dir(out_dir);
    std::ostringstream roc, auc, stars;
    roc << "method\treplicate\tseed\tlambda_index\tfpr\ttpr\n";
    auc << "method\treplicate\tseed\tauc\n";
    stars << "method\treplicate\tseed\tselected_lambda\tnum_edges\tprecision\trecall\tf1\n";
    int failures = 0;
    json failure_list = json::array();
    std::map<std::string, std::vector<RocPoint>> sums;
    std::map<std::string, int> roc_counts;
    std::map<std::string, double> auc_sums;
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        if (!res.error.empty()) {
            ++failures;
            failure_list.push_back({{"replicate", r}, {"seed", seeds[r]}, {"error", res.error}});
            std::cerr << "replicate " << r << " (seed " << seeds[r] << ") failed: " << res.error << "\n";
            continue;
        }
        for (const auto& name : bf.methods) {
            if (auto it = res.roc.find(name); it != res.roc.end()) {
                const auto& curve = it->second;
                auto& acc = sums[name];
                if (acc.empty()) acc.resize(curve.points.size());
                for (std::size_t l = 0; l < curve.points.size(); ++l) {
                    roc << name << '\t' << r << '\t' << seeds[r] << '\t' << l << '\t' << fmt(curve.points[l].fpr)
                        << '\t' << fmt(curve.points[l].tpr) << '\n';
                    acc[l].fpr += curve.points[l].fpr;
                    acc[l].tpr += curve.points[l].tpr;
                }
                auc << name << '\t' << r << '\t' << seeds[r] << '\t' << fmt(curve.auc) << '\n';
                roc_counts[name] += 1;
                auc_sums[name] += curve.auc;
            }
            if (auto it = res.stars.find(name); it != res.stars.end()) {
                stars << name << '\t' << r << '\t' << seeds[r] << '\t';
                if (it->second) {
                    const auto& c = *it->second;
                    stars << fmt(res.stars_lambda.at(name)) << '\t' << res.stars_edges.at(name) << '\t'
                          << fmt(c.precision) << '\t' << fmt(c.recall) << '\t' << fmt(c.f1) << '\n';
                } else {
                    stars << "NA\tNA\tNA\tNA\tNA\n";
                }
            }
        }
    }
    std::ostringstream avg;
    avg << "method\tlambda_index\tmean_fpr\tmean_tpr\n";
    json auc_summary = json::object();
    for (const auto& name : bf.methods) {
        if (!roc_counts.count(name)) continue;
        auto pts = sums[name];
        const double cnt = roc_counts[name];
        for (std::size_t l = 0; l < pts.size(); ++l) {
            pts[l].fpr /= cnt;
            pts[l].tpr /= cnt;
            avg << name << '\t' << l << '\t' << fmt(pts[l].fpr) << '\t' << fmt(pts[l].tpr) << '\n';
        }
        auc_summary[name] = {{"auc_of_average", roc_auc(pts)}, {"mean_auc", auc_sums[name] / cnt}};
    }
    write_text(out / "roc.tsv", roc.str());
    write_text(out / "roc_avg.tsv", avg.str());
    write_text(out / "auc.tsv", auc.str());
    if (bf.stars_replicates > 0) write_text(out / "stars_metrics.tsv", stars.str());
    write_json(out / "summary.json",
               {{"config", config_json(base)}, {"auc", auc_summary}, {"failures", failures}, {"failed", failure_list}});

    cli::RunManifest m;
    m.subcommand = "bench";
    m.seed = g.seed;
    m.options = ef.to_json(false);
    m.options["simulation"] = config_json(base);
    m.options["stars"] = sf.to_json();
    m.options["replicates"] = bf.replicates;
    m.options["stars_replicates"] = bf.stars_replicates;
    m.options["methods"] = bf.methods;
    write_json(out / "manifest.json", m.to_json());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse interaction networks from compositional count data"};
    app.require_subcommand(1);
    GlobalFlags g;
    g.threads = default_threads();
    app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (env CGLASSO_THREADS)")->check(CLI::PositiveNumber);
    app.set_version_flag("--version", cli::kToolVersion);

    std::string out_dir;

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a logistic normal multinomial dataset");
    SimFlags sim_flags;
    sim_flags.add(sim_cmd);
    sim_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* ingest_cmd = app.add_subcommand("ingest", "Filter a count table and pick the reference taxon");
    IngestFlags ingest_flags;
    ingest_flags.add(ingest_cmd);
    ingest_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* fit_cmd = app.add_subcommand("fit", "Fit one estimator at one lambda or along a lambda path");
    IngestFlags fit_ingest;
    EstimatorFlags fit_est;
    std::optional<double> fit_lambda;
    std::string gold;
    fit_ingest.add(fit_cmd);
    fit_est.add(fit_cmd);
    auto* lambda_opt = fit_cmd->add_option("--lambda", fit_lambda, "Single lambda (overrides the path)");
    fit_cmd->add_option("--gold", gold, "Known edges (TSV taxon pairs) for the overlap curve");
    fit_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* stars_cmd = app.add_subcommand("stars", "Select lambda by subsampling stability");
    IngestFlags stars_ingest;
    EstimatorFlags stars_est;
    StarsFlags stars_flags;
    stars_ingest.add(stars_cmd);
    stars_est.add(stars_cmd);
    stars_flags.add(stars_cmd);
    stars_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* bench_cmd = app.add_subcommand("bench", "Simulate replicates and score network recovery");
    SimFlags bench_sim;
    EstimatorFlags bench_est;
    StarsFlags bench_stars;
    BenchFlags bench_flags;
    bench_sim.add(bench_cmd);
    bench_est.add(bench_cmd, false);
    bench_stars.add(bench_cmd);
    bench_flags.add(bench_cmd);
    bench_cmd->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    (void)lambda_opt;

    try {
        if (*sim_cmd) return cmd_simulate(sim_flags, out_dir, g);
        if (*ingest_cmd) return cmd_ingest(ingest_flags, out_dir, g);
        if (*fit_cmd) return cmd_fit(fit_ingest, fit_est, fit_lambda, gold, out_dir, g);
        if (*stars_cmd) return cmd_stars(stars_ingest, stars_est, stars_flags, out_dir, g);
        if (*bench_cmd) return cmd_bench(bench_sim, bench_est, bench_stars, bench_flags, out_dir, g);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
