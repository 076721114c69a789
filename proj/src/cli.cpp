#include "qpfactor/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "qpfactor/error.hpp"
#include "qpfactor/persistence.hpp"
#include "qpfactor/signal.hpp"
#include "qpfactor/universality.hpp"

namespace qpf {

namespace {

class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_factorize_options(CLI::App* sub, RunConfig& c) {
    sub->add_option("--offsets", c.offsets, "delay offsets in domain units (default: automatic)");
    sub->add_option("--landmarks", c.landmarks, "maxmin landmark count");
    sub->add_option("--landmark-seed", c.landmark_seed, "first landmark (cloud index)");
    sub->add_option("--rmax", c.rmax, "Rips truncation radius (default: fraction of diameter)");
    sub->add_option("--rmax-fraction", c.rmax_fraction, "rmax as a fraction of the landmark diameter");
    sub->add_option("--prime", c.prime, "coefficient field Z/p");
    sub->add_option("--bins", c.bins, "bins of the U model");
    sub->add_option("--tau", c.tau, "death/birth ratio needed for a circular phase");
    sub->add_option("--eps-const", c.eps_const, "spread below which the signal is constant");
    sub->add_option("--tol-phase", c.tol_phase, "phase tolerance of the injectivity check");
    sub->add_option("--tol-domain", c.tol_domain, "domain separation below which samples are neighbours");
    sub->add_option("--cocycle-index", c.cocycle_index, "use this H1 bar instead of the dominant one");
    sub->add_option("--smoothing-factor", c.smoothing_factor, "smoothing graph radius in units of bar birth");
    sub->add_option("--extend-tail", c.extend_tail, "phase samples past the last delay window");
}

struct Cli {
    CLI::App app{"Quasiperiodic factorization of sampled signals", "qpfactor"};
    RunConfig config;
    std::string config_file;

    Cli() {
        app.require_subcommand(1, 1);
        app.set_help_all_flag("--help-all");
        RunConfig& c = config;

        auto* gen = app.add_subcommand("generate", "write a fixture signal");
        gen->add_option("--kind", c.kind, "sine | modulated | chirp | arctan | constant | linear");
        gen->add_option("--n", c.n, "sample count");
        gen->add_option("--a", c.a, "domain start");
        gen->add_option("--b", c.b, "domain end");
        gen->add_option("--sine-period", c.sine_period, "period of the sine fixture");
        gen->add_option("--value", c.value, "value of the constant fixture");
        gen->add_option("--noise", c.noise, "Gaussian noise sigma");
        gen->add_option("--seed", c.seed, "noise seed");
        gen->add_option("--out", c.out, "signal CSV");

        auto* fac = app.add_subcommand("factorize", "factorize a signal");
        fac->add_option("--in", c.in, "signal CSV");
        fac->add_option("--out", c.out, "factorization JSON");
        fac->add_option("--phase-out", c.phase_out, "phase CSV (x,theta)");
        fac->add_option("--u-out", c.u_out, "U bins CSV");
        add_factorize_options(fac, c);

        auto* rep = app.add_subcommand("report", "factorize and write every plot-ready file");
        rep->add_option("--in", c.in, "signal CSV");
        rep->add_option("--out-dir", c.out_dir, "output directory");
        add_factorize_options(rep, c);

        auto* join = app.add_subcommand("join", "join two phase maps sampled on the same grid");
        join->add_option("--phase1", c.phase1, "first phase CSV");
        join->add_option("--phase2", c.phase2, "second phase CSV");
        join->add_option("--bins", c.join_bins, "bins per factor");
        join->add_option("--tol", c.tol, "refinement tolerance (default 1/(4 bins))");
        join->add_option("--lipschitz", c.lipschitz, "refinement slack K");
        join->add_option("--out", c.out, "join report JSON");

        auto* check = app.add_subcommand("check", "injectivity and refinement checks on a phase map");
        check->add_option("--phase", c.phase, "phase CSV");
        check->add_option("--period", c.period, "window length T for the injectivity check");
        check->add_option("--tol-phase", c.tol_phase, "phase tolerance (default 1/256)");
        check->add_option("--tol-domain", c.tol_domain, "neighbour separation (default 3 grid steps)");
        check->add_option("--against", c.against, "second phase CSV for refinement checks");
        check->add_option("--tol", c.tol, "refinement tolerance (default 1/256)");
        check->add_option("--lipschitz", c.lipschitz, "refinement slack K");
        check->add_option("--out", c.out, "check report JSON (default: stdout)");

        for (auto* sub : app.get_subcommands({}))
            sub->add_option("--config", config_file, "JSON file with flag names as keys");
    }
};

std::vector<std::string> json_to_args(const Json& v) {
    std::vector<std::string> out;
    auto scalar = [](const Json& x) -> std::string {
        if (x.is_string()) return x.get<std::string>();
        if (x.is_boolean()) return x.get<bool>() ? "true" : "false";
        return x.dump();
    };
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(scalar(e));
    } else {
        out.push_back(scalar(v));
    }
    return out;
}

void apply_config_file(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw UsageError("config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "config") throw UsageError("config: nested config files are not supported");
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt) throw UsageError(key + ": unknown key for " + sub->get_name());
        if (opt->count() > 0) continue;  // command line wins
        if (value.is_null()) continue;
        try {
            opt->add_result(json_to_args(value));
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError(key + ": " + e.what());
        }
    }
}

void need(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw UsageError(field + ": " + what);
}

void validate(const RunConfig& c) {
    const std::string& cmd = c.command;
    if (cmd == "generate") {
        need(!c.out.empty(), "out", "required");
        need(c.kind == "sine" || c.kind == "modulated" || c.kind == "chirp" || c.kind == "arctan" ||
                 c.kind == "constant" || c.kind == "linear",
             "kind", "unknown generator '" + c.kind + "'");
        need(c.n >= 2, "n", "must be at least 2");
        need(std::isfinite(c.a), "a", "must be finite");
        need(std::isfinite(c.b) && c.b > c.a, "b", "must be greater than a");
        need(c.sine_period > 0.0, "sine-period", "must be positive");
        need(c.noise >= 0.0, "noise", "must be nonnegative");
        need(c.kind != "chirp" || c.a > 0.0, "a", "chirp domain must start above 0");
    }
    if (cmd == "factorize" || cmd == "report") {
        need(!c.in.empty(), "in", "required");
        if (cmd == "factorize") need(!c.out.empty(), "out", "required");
        if (cmd == "report") need(!c.out_dir.empty(), "out-dir", "required");
        for (std::size_t i = 0; i < c.offsets.size(); ++i) {
            need(c.offsets[i] > 0.0, "offsets", "must be positive");
            if (i > 0) need(c.offsets[i] > c.offsets[i - 1], "offsets", "must be strictly increasing");
        }
        need(c.landmarks >= 1, "landmarks", "must be positive");
        need(!c.rmax || *c.rmax > 0.0, "rmax", "must be positive");
        need(c.rmax_fraction > 0.0, "rmax-fraction", "must be positive");
        need(is_prime(c.prime), "prime", std::to_string(c.prime) + " is not prime");
        need(c.bins >= 1, "bins", "must be positive");
        need(c.tau > 0.0, "tau", "must be positive");
        need(!c.eps_const || *c.eps_const > 0.0, "eps-const", "must be positive");
        need(c.smoothing_factor >= 1.0, "smoothing-factor", "must be at least 1");
    }
    if (cmd == "join") {
        need(!c.phase1.empty(), "phase1", "required");
        need(!c.phase2.empty(), "phase2", "required");
        need(!c.out.empty(), "out", "required");
        need(c.join_bins >= 2, "bins", "must be at least 2");
    }
    if (cmd == "check") {
        need(!c.phase.empty(), "phase", "required");
        need(c.period || !c.against.empty(), "period", "give --period and/or --against");
        need(!c.period || *c.period > 0.0, "period", "must be positive");
    }
    if (cmd == "join" || cmd == "check") {
        need(!c.tol || *c.tol > 0.0, "tol", "must be positive");
        need(c.lipschitz >= 1.0, "lipschitz", "must be at least 1");
    }
    need(!c.tol_phase || *c.tol_phase > 0.0, "tol-phase", "must be positive");
    need(!c.tol_domain || *c.tol_domain > 0.0, "tol-domain", "must be positive");
}

RunConfig parse_impl(const std::vector<std::string>& args) {
    Cli cli;
    std::vector<std::string> argv_store{"qpfactor"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        cli.app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(cli.app.help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(cli.app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    CLI::App* sub = cli.app.get_subcommands().front();
    cli.config.command = sub->get_name();
    if (!cli.config_file.empty()) apply_config_file(sub, cli.config_file);
    validate(cli.config);
    return cli.config;
}

SampledSignal generate(const RunConfig& c) {
    SampledSignal s = [&] {
        if (c.kind == "sine") return gen_sine(c.n, c.a, c.b, c.sine_period);
        if (c.kind == "modulated") return gen_modulated_periodic(c.n, c.a, c.b);
        if (c.kind == "chirp") return gen_chirp_recip(c.n, c.a, c.b);
        if (c.kind == "arctan") return gen_arctan_circle(c.n, c.a, c.b);
        if (c.kind == "constant") return gen_constant(c.n, c.a, c.b, c.value);
        return gen_linear(c.n, c.a, c.b);
    }();
    if (c.noise > 0.0) s = add_gaussian_noise(s, c.noise, c.seed);
    return s;
}

// Domain grids of two phase files must coincide sample for sample.
void require_same_grid(const PhaseSeries& a, const PhaseSeries& b) {
    require(a.x.size() == b.x.size(), "phase files have different sample counts");
    for (std::size_t i = 0; i < a.x.size(); ++i)
        require(std::abs(a.x[i] - b.x[i]) <= 1e-9 * (1.0 + std::abs(a.x[i])),
                "phase files sample different domain points");
}

std::vector<WitnessPair> refinement_witnesses(const PhaseSeries& p1, const PhaseSeries& p2, double tol,
                                              double lipschitz, bool& forward, bool& backward) {
    std::vector<WitnessPair> w;
    const auto f = refines(p1.theta, p2.theta, tol, lipschitz);
    const auto r = refines(p2.theta, p1.theta, tol, lipschitz);
    forward = f.holds;
    backward = r.holds;
    if (f.witness) w.push_back({"1->2", p1.x[f.witness->first], p1.x[f.witness->second]});
    if (r.witness) w.push_back({"2->1", p1.x[r.witness->first], p1.x[r.witness->second]});
    return w;
}

int run_factorize(const RunConfig& c, std::ostream& out) {
    const SampledSignal s = load_signal(c.in);
    FactorizeTrace trace;
    const Factorization fz = factorize(s, to_factorize_config(c), c.command == "report" ? &trace : nullptr);

    RunConfig effective = c;
    effective.offsets = fz.offsets;
    if (!effective.tol_phase) effective.tol_phase = 1.0 / (4.0 * static_cast<double>(c.bins));
    if (!effective.tol_domain) effective.tol_domain = 3.0 * s.step();
    const Json j = factorization_json(s, fz, config_echo(effective));

    if (c.command == "factorize") {
        write_json(j, c.out);
        if (!c.phase_out.empty()) save_phase_csv(c.phase_out, phase_series(s, fz));
        if (!c.u_out.empty()) save_u_bins_csv(c.u_out, fz.u_model);
    } else {
        const std::filesystem::path dir(c.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
        write_json(j, dir / "factorization.json");
        Json diag = diagnostics_json(fz);
        diag["config_echo"] = config_echo(effective);
        write_json(diag, dir / "diagnostics.json");
        save_phase_csv(dir / "phase.csv", phase_series(s, fz));
        save_u_bins_csv(dir / "u_bins.csv", fz.u_model);
        if (trace.stage) {
            save_barcode_csv(trace.stage->barcode, dir / "barcode.csv");
            save_point_cloud(trace.stage->cloud, dir / "embedding.csv");
        }
        if (trace.phase_bar) save_cocycle_csv(trace.phase_bar->cocycle, dir / "cocycle.csv");
    }
    out << phase_class_name(fz.phase_class);
    if (fz.period_estimate) out << " T=" << *fz.period_estimate;
    out << " rms=" << fz.residual_rms << '\n';
    return 0;
}

int run_join(const RunConfig& c, std::ostream& out) {
    const PhaseSeries p1 = load_phase_csv(c.phase1), p2 = load_phase_csv(c.phase2);
    require_same_grid(p1, p2);
    const QuotientPartition q = join(p1.theta, p2.theta, c.join_bins);
    RunConfig effective = c;
    if (!effective.tol) effective.tol = 1.0 / (4.0 * static_cast<double>(c.join_bins));
    bool fwd = false, back = false;
    const auto witnesses = refinement_witnesses(p1, p2, *effective.tol, c.lipschitz, fwd, back);
    write_json(join_json(q, c.join_bins, witnesses, config_echo(effective)), c.out);
    out << "classes=" << q.class_count << " winding=" << q.winding_estimate << '\n';
    return 0;
}

int run_check(const RunConfig& c, std::ostream& out) {
    const PhaseSeries p = load_phase_csv(c.phase);
    RunConfig effective = c;
    if (!effective.tol_phase) effective.tol_phase = 1.0 / 256.0;
    if (!effective.tol) effective.tol = 1.0 / 256.0;
    if (!effective.tol_domain) {
        const double h = p.x.size() > 1 ? (p.x.back() - p.x.front()) / static_cast<double>(p.x.size() - 1) : 0.0;
        effective.tol_domain = 3.0 * h;
    }
    Json j;
    if (c.period) {
        const auto r = injectivity_windows(p.theta, p.x, *c.period, *effective.tol_phase, *effective.tol_domain);
        Json w = Json::array();
        for (const auto& [a, b] : r.witnesses) w.push_back(Json::array({p.x[a], p.x[b]}));
        j["injectivity"] = Json{{"pass", r.pass}, {"violations", r.violations}, {"witnesses", w}};
    } else {
        j["injectivity"] = nullptr;
    }
    if (!c.against.empty()) {
        const PhaseSeries q = load_phase_csv(c.against);
        require_same_grid(p, q);
        bool fwd = false, back = false;
        const auto witnesses = refinement_witnesses(p, q, *effective.tol, c.lipschitz, fwd, back);
        Json w = Json::array();
        for (const auto& wp : witnesses)
            w.push_back(Json{{"direction", wp.direction}, {"x", Json::array({wp.x1, wp.x2})}});
        j["refinement"] = Json{{"phase_refines_against", fwd},
                               {"against_refines_phase", back},
                               {"equivalent", fwd && back},
                               {"witness_pairs", w}};
    } else {
        j["refinement"] = nullptr;
    }
    j["config_echo"] = config_echo(effective);
    if (c.out.empty())
        out << j.dump(2) << '\n';
    else
        write_json(j, c.out);
    return 0;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) { return parse_impl(args); }

FactorizeConfig to_factorize_config(const RunConfig& c) {
    FactorizeConfig f;
    if (!c.offsets.empty()) f.offsets = c.offsets;
    f.landmarks = c.landmarks;
    f.landmark_seed = c.landmark_seed;
    f.rmax = c.rmax;
    f.rmax_fraction = c.rmax_fraction;
    f.prime = c.prime;
    f.bins = c.bins;
    f.tau = c.tau;
    f.eps_const = c.eps_const;
    f.tol_phase = c.tol_phase;
    f.tol_domain = c.tol_domain;
    f.cocycle_index = c.cocycle_index;
    f.smoothing_factor = c.smoothing_factor;
    f.extend_tail = c.extend_tail;
    return f;
}

Json config_echo(const RunConfig& c) {
    auto opt = [](const auto& o) -> Json {
        if (o) return *o;
        return nullptr;
    };
    Json j;
    j["command"] = c.command;
    if (c.command == "generate") {
        j["kind"] = c.kind;
        j["n"] = c.n;
        j["a"] = c.a;
        j["b"] = c.b;
        j["sine-period"] = c.sine_period;
        j["value"] = c.value;
        j["noise"] = c.noise;
        j["seed"] = c.seed;
        j["out"] = c.out;
    } else if (c.command == "factorize" || c.command == "report") {
        j["in"] = c.in;
        if (c.command == "factorize") {
            j["out"] = c.out;
            j["phase-out"] = c.phase_out;
            j["u-out"] = c.u_out;
        } else {
            j["out-dir"] = c.out_dir;
        }
        j["offsets"] = c.offsets;
        j["landmarks"] = c.landmarks;
        j["landmark-seed"] = c.landmark_seed;
        j["rmax"] = opt(c.rmax);
        j["rmax-fraction"] = c.rmax_fraction;
        j["prime"] = c.prime;
        j["bins"] = c.bins;
        j["tau"] = c.tau;
        j["eps-const"] = opt(c.eps_const);
        j["tol-phase"] = opt(c.tol_phase);
        j["tol-domain"] = opt(c.tol_domain);
        j["cocycle-index"] = opt(c.cocycle_index);
        j["smoothing-factor"] = c.smoothing_factor;
        j["extend-tail"] = c.extend_tail;
    } else if (c.command == "join") {
        j["phase1"] = c.phase1;
        j["phase2"] = c.phase2;
        j["bins"] = c.join_bins;
        j["tol"] = opt(c.tol);
        j["lipschitz"] = c.lipschitz;
        j["out"] = c.out;
    } else if (c.command == "check") {
        j["phase"] = c.phase;
        j["period"] = opt(c.period);
        j["tol-phase"] = opt(c.tol_phase);
        j["tol-domain"] = opt(c.tol_domain);
        j["against"] = c.against;
        j["tol"] = opt(c.tol);
        j["lipschitz"] = c.lipschitz;
        j["out"] = c.out;
    }
    return j;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        if (c.command == "generate") {
            save_signal(generate(c), c.out);
            return 0;
        }
        if (c.command == "factorize" || c.command == "report") return run_factorize(c, out);
        if (c.command == "join") return run_join(c, out);
        if (c.command == "check") return run_check(c, out);
        err << "error: invalid-argument: unknown command '" << c.command << "'\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        c = parse_config(args);
    } catch (const HelpRequested& h) {
        out << h.what();
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun with --help for the list of flags\n";
        return 2;
    }
    return run(c, out, err);
}

}  // namespace qpf
