#include "aggrolab/cli.hpp"

#include "aggrolab/analytics.hpp"
#include "aggrolab/disaggregation.hpp"
#include "aggrolab/errors.hpp"
#include "aggrolab/fields.hpp"
#include "aggrolab/io.hpp"
#include "aggrolab/parallel.hpp"
#include "aggrolab/quadrature.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <gsl/gsl_version.h>
#include <openssl/crypto.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace aggrolab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTopKeys = {"kind",  "seed",   "workers",   "out",      "mixing",       "innovation",
                                        "sizes", "scheme", "max_cells", "diagnose", "disaggregate", "field"};

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

std::size_t size_value(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    require(v.is_number_integer() && v.get<long long>() >= 0, std::string("sizes.") + key + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::optional<unsigned> env_workers() {
    const char* s = std::getenv(kWorkersEnv);
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    require(*end == '\0' && v >= 1 && v <= 4096, std::string(kWorkersEnv) + " must be a positive integer");
    return static_cast<unsigned>(v);
}

std::optional<double> opt_num(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    require(j.at(key).is_number(), std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& block) {
    require(j.is_object(), block + " must be an object");
    for (const auto& [k, v] : j.items()) require(allowed.count(k) > 0, "unknown key in " + block + ": " + k);
}

double sigma2_of(const ExperimentConfig& cfg) {
    require(cfg.innovation.has_value(), "an innovation block is required");
    require(has_finite_variance(*cfg.innovation), "this experiment needs finite-variance innovations");
    return variance(*cfg.innovation);
}

AggregationScheme scheme_of(const ExperimentConfig& cfg) {
    if (cfg.scheme) return *cfg.scheme;
    if (std::holds_alternative<IdTriplet>(*cfg.innovation)) return AggregationScheme::TriangularArray;
    return has_finite_variance(*cfg.innovation) ? AggregationScheme::FiniteVariance : AggregationScheme::Stable;
}

void validate_kind(const ExperimentConfig& c) {
    auto need_model = [&] {
        require(c.mixing.has_value(), "a mixing block is required");
        require(c.innovation.has_value(), "an innovation block is required");
        require(c.sizes.N >= 1 && c.sizes.n >= 1, "sizes.N and sizes.n must be positive");
    };
    switch (c.kind) {
        case Kind::Simulate:
        case Kind::Aggregate:
            need_model();
            require(c.sizes.replicates >= 1, "sizes.replicates must be positive");
            break;
        case Kind::Diagnose: {
            check_keys(c.diagnose, {"alpha", "beta", "sigma", "alpha0", "N", "n", "max_lag"}, "diagnose");
            const bool has_beta = c.diagnose.contains("beta") || (c.mixing && tail_exponent(*c.mixing));
            const bool has_alpha = c.diagnose.contains("alpha") || c.innovation.has_value();
            require(has_beta, "diagnose needs beta or a mixing law with a declared tail exponent");
            require(has_alpha, "diagnose needs alpha or an innovation block");
            break;
        }
        case Kind::Disaggregate: {
            need_model();
            check_keys(c.disaggregate, {"method", "k_max", "h", "alpha_weight", "K", "gamma_rate", "grid_size"},
                       "disaggregate");
            const std::string m = c.disaggregate.value("method", "robinson");
            require(m == "robinson" || m == "beran" || m == "gegenbauer", "unknown disaggregation method: " + m);
            sigma2_of(c);
            break;
        }
        case Kind::Field: {
            check_keys(c.field, {"variant", "fixed_a", "clip", "tol"}, "field");
            field_variant_from_string(c.field.value("variant", "4N"));
            require(c.innovation.has_value(), "an innovation block is required");
            require(c.field.contains("fixed_a") != c.mixing.has_value(),
                    "field runs need exactly one of field.fixed_a or a mixing block");
            require(c.sizes.L >= 1 && c.sizes.N >= 1, "sizes.L and sizes.N must be positive");
            const double clip = opt_num(c.field, "clip").value_or(1e-3);
            require(clip > 0.0 && clip < 1.0, "field.clip must lie in (0,1)");
            break;
        }
        case Kind::Report: break;
    }
}

// ---------------------------------------------------------------- outputs

class RunLock {
public:
    explicit RunLock(const fs::path& dir) : path_(dir / ".aggrolab.lock") {
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) throw ResourceLimitError("output directory is locked by another run: " + dir.string());
        std::fclose(f);
    }
    ~RunLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    fs::path path_;
};

struct Outputs {
    fs::path dir;
    std::vector<std::string> files;
    fs::path path(const std::string& name) {
        files.push_back(name);
        const fs::path p = dir / name;
        fs::create_directories(p.parent_path());
        return p;
    }
};

json versions() {
    return {{"aggrolab", kVersion},
            {"compiler", __VERSION__},
            {"boost", BOOST_LIB_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", std::string(fftw_version)},
            {"gsl", GSL_VERSION},
            {"openssl", OpenSSL_version(OPENSSL_VERSION)}};
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json file_entries(const fs::path& dir, const std::vector<std::string>& files) {
    json arr = json::array();
    for (const auto& f : files)
        arr.push_back({{"file", f}, {"sha256", sha256_file(dir / f)}, {"bytes", fs::file_size(dir / f)}});
    return arr;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::invalid_argument("cannot read " + p.string());
    return json::parse(in);
}

json report_json(const RegimeReport& r) { return r.to_json(); }

std::vector<std::size_t> powers_of_two_upto(std::size_t n, std::size_t from = 2) {
    std::vector<std::size_t> out;
    for (std::size_t m = from; m <= n; m *= 2) out.push_back(m);
    return out;
}

// ---------------------------------------------------------------- kinds

json run_simulate(const ExperimentConfig& c, Outputs& o) {
    const Stream stream(c.seed);
    SimulationOptions opts;
    opts.workers = c.workers;
    opts.max_cells = c.max_cells;
    Panel panel = simulate_panel(*c.mixing, *c.innovation, c.sizes.N, c.sizes.n, stream, opts);
    panel.lineage = {c.seed, 0};
    const fs::path pdir = o.dir / "panel";
    write_panel(panel, pdir);
    for (const char* f : {"panel/values.f64", "panel/coeffs.f64", "panel/panel.json"}) o.files.push_back(f);
    const AggregationScheme scheme = scheme_of(c);
    const AggregatedSeries agg = aggregate(panel, scheme);
    write_aggregate_csv(agg, o.path("aggregate.csv"));

    const int lags = static_cast<int>(std::min<std::size_t>(10, c.sizes.n - 1));
    json cov = json::array(), pcov = json::array();
    for (int k = 0; k <= lags; ++k) {
        cov.push_back(sample_cov(agg.values, k));
        pcov.push_back(panel_cov(panel, k));
    }
    return {{"N", c.sizes.N},
            {"n", c.sizes.n},
            {"clip_count", panel.clip_count},
            {"scheme", to_string(scheme)},
            {"exponent", agg.exponent},
            {"aggregate_sample_cov", cov},
            {"panel_cov", pcov}};
}

json run_aggregate(const ExperimentConfig& c, Outputs& o) {
    const AggregationScheme scheme = scheme_of(c);
    const std::size_t R = c.sizes.replicates, n = c.sizes.n;
    SimulationOptions opts;
    opts.max_cells = c.max_cells;
    opts.workers = R > 1 ? 1 : c.workers;
    std::vector<AggregatedSeries> reps(R);
    std::vector<std::size_t> clips(R, 0);
    const Stream root(c.seed);
    parallel_for(R, R > 1 ? c.workers : 1, [&](std::size_t r) {
        reps[r] = simulate_aggregate(*c.mixing, *c.innovation, c.sizes.N, n, root.for_replicate(r), scheme, opts,
                                     &clips[r]);
    });
    write_aggregate_csv(reps[0], o.path("aggregate.csv"));
    std::vector<double> all;
    all.reserve(R * n);
    for (const auto& r : reps) all.insert(all.end(), r.values.begin(), r.values.end());
    write_f64(o.path("aggregates.f64"), all);

    std::size_t clip_total = 0;
    for (auto k : clips) clip_total += k;
    json res{{"N", c.sizes.N},
             {"n", n},
             {"replicates", R},
             {"scheme", to_string(scheme)},
             {"exponent", reps[0].exponent},
             {"clip_count", clip_total}};

    if (has_finite_variance(*c.innovation)) {
        quad::Sum mean_acc;
        for (double x : all) mean_acc.add(x);
        const double mean = mean_acc.value() / static_cast<double>(all.size());
        const auto ms = powers_of_two_upto(n, 1);
        std::vector<double> emp, theo;
        std::vector<std::pair<double, double>> fit;
        const auto beta = tail_exponent(*c.mixing);
        const bool normalized = scheme == AggregationScheme::FiniteVariance;
        for (std::size_t m : ms) {
            quad::Sum s;
            std::size_t blocks = 0;
            for (const auto& r : reps)
                for (std::size_t b = 0; b + m <= n; b += m) {
                    double bs = 0.0;
                    for (std::size_t t = b; t < b + m; ++t) bs += r.values[t] - mean;
                    s.add(bs * bs);
                    ++blocks;
                }
            emp.push_back(s.value() / static_cast<double>(blocks));
            theo.push_back(normalized ? theoretical_partial_sum_variance(*c.mixing, variance(*c.innovation), m)
                                      : std::nan(""));
            if (m >= 16) fit.emplace_back(static_cast<double>(m), emp.back());
        }
        std::vector<double> mcol(ms.begin(), ms.end());
        write_csv(o.path("variance_scaling.csv"), {"m", "empirical", "theoretical"}, {mcol, emp, theo});
        if (fit.size() >= 4) res["empirical_slope"] = partial_sum_slope(fit);
        if (normalized && beta && *beta > 0.0 && *beta < 1.0) res["reference_slope"] = 2.0 - *beta;
    } else {
        const TailIndex ti = tail_index(all);
        res["tail_index"] = {{"alpha", ti.alpha}, {"lo", ti.lo}, {"hi", ti.hi}, {"k", ti.k}};
    }
    return res;
}

json run_diagnose(const ExperimentConfig& c, Outputs& o) {
    const json& d = c.diagnose;
    const double beta = d.contains("beta") ? d.at("beta").get<double>() : *tail_exponent(*c.mixing);
    const double alpha = d.contains("alpha") ? d.at("alpha").get<double>() : innovation_alpha(*c.innovation);
    json res{{"alpha", alpha}, {"beta", beta}};

    const RegimeReport mem = classify_memory(alpha, beta);
    res["memory"] = report_json(mem);
    RegimeReport merged = mem;

    std::optional<double> sigma = opt_num(d, "sigma"), alpha0 = opt_num(d, "alpha0");
    if (c.innovation && std::holds_alternative<IdTriplet>(*c.innovation)) {
        const auto& id = std::get<IdTriplet>(*c.innovation);
        if (!sigma) sigma = id.sigma;
        if (!alpha0 && id.small_jumps) alpha0 = id.small_jumps->alpha0;
    }
    if (sigma && beta > 0.0) {
        // Without small jumps any alpha0 in (1+beta, 2) gives the same verdict when sigma > 0.
        const RegimeReport reg = classify_region(beta, *sigma, alpha0.value_or(1.999));
        res["region"] = report_json(reg);
        merged.region = reg.region;
        merged.H = reg.H;
        merged.exponents = reg.exponents;
        merged.limit = reg.limit;
        merged.boundary = merged.boundary || reg.boundary;
        if (!reg.note.empty()) merged.note = reg.note;
    }
    if (d.contains("N") && d.contains("n")) {
        const RegimeReport g = classify_growth(d.at("N").get<double>(), d.at("n").get<double>(), beta);
        res["growth"] = report_json(g);
        merged.growth = g.growth;
    }
    res["regime"] = report_json(merged);
    write_json(o.path("regime.json"), res["regime"]);

    if (c.mixing && c.innovation && has_finite_variance(*c.innovation)) {
        const double s2 = variance(*c.innovation);
        const int max_lag = d.value("max_lag", 100);
        std::vector<double> t, g;
        for (int k = 0; k <= max_lag; ++k) {
            t.push_back(k);
            g.push_back(theoretical_cov(*c.mixing, s2, k));
        }
        write_csv(o.path("cov.csv"), {"t", "gamma"}, {t, g});
        std::vector<double> y, f;
        for (int i = 0; i <= 60; ++i) {
            y.push_back(std::numbers::pi * std::pow(10.0, -4.0 + 4.0 * i / 60.0));
            f.push_back(spectral_density(*c.mixing, s2, y.back()));
        }
        write_csv(o.path("spectral.csv"), {"y", "f"}, {y, f});
    }
    return res;
}

json run_disaggregate(const ExperimentConfig& c, Outputs& o) {
    const json& d = c.disaggregate;
    const std::string method = d.value("method", "robinson");
    const Stream stream(c.seed);
    SimulationOptions opts;
    opts.workers = c.workers;
    opts.max_cells = c.max_cells;
    json res{{"method", method}, {"N", c.sizes.N}, {"n", c.sizes.n}};
    if (method == "robinson") {
        const int k_max = d.value("k_max", 5);
        const Panel panel = simulate_panel(*c.mixing, *c.innovation, c.sizes.N, c.sizes.n, stream, opts);
        const auto mu = robinson_moments(panel, k_max);
        std::vector<double> k, est, truth;
        for (int i = 0; i <= k_max; ++i) {
            k.push_back(i);
            est.push_back(mu[i]);
            truth.push_back(moment(*c.mixing, i));
        }
        write_csv(o.path("moments.csv"), {"k", "estimate", "truth"}, {k, est, truth});
        res["estimate"] = est;
        res["truth"] = truth;
        res["clip_count"] = panel.clip_count;
    } else if (method == "beran") {
        const Panel panel = simulate_panel(*c.mixing, *c.innovation, c.sizes.N, c.sizes.n, stream, opts);
        const double h = opt_num(d, "h").value_or(std::pow(static_cast<double>(c.sizes.n), -0.25));
        const BeranResult b = beran_mle(panel, h);
        res["h"] = h;
        res["p"] = b.p;
        res["q"] = b.q;
        res["se_p"] = b.se_p;
        res["se_q"] = b.se_q;
        res["loglik"] = b.loglik;
        res["clamped"] = b.clamped;
        res["clamp_rate"] = b.clamp_rate;
        write_f64(o.path("lag_one.f64"), lag_one_coefficients(panel.values));
    } else {
        const AggregatedSeries agg = simulate_aggregate(*c.mixing, *c.innovation, c.sizes.N, c.sizes.n, stream,
                                                        AggregationScheme::FiniteVariance, opts);
        GegenbauerOptions g;
        if (d.contains("K")) g.K = d.at("K").get<int>();
        if (auto r = opt_num(d, "gamma_rate")) g.gamma_rate = *r;
        g.sigma2 = sigma2_of(c);
        g.grid_size = d.value("grid_size", 200);
        const double aw = opt_num(d, "alpha_weight").value_or(1.0);
        const DensityEstimate est = gegenbauer_estimate(agg.values, aw, g);
        const auto truth = mixing_on_grid(est, *c.mixing);
        write_csv(o.path("density.csv"), {"x", "estimate", "truth"}, {est.grid, est.values, truth});
        res["K"] = est.K;
        res["alpha_weight"] = aw;
        res["coefficients"] = est.coefficients;
        res["weighted_l2_error"] = weighted_l2_error(est, truth, aw);
    }
    return res;
}

json run_field(const ExperimentConfig& c, Outputs& o) {
    FieldModel model;
    model.variant = field_variant_from_string(c.field.value("variant", "4N"));
    model.innovation = *c.innovation;
    if (c.field.contains("fixed_a")) model.fixed_a = c.field.at("fixed_a").get<double>();
    else model.mixing = *c.mixing;
    FieldOptions opts;
    opts.workers = c.workers;
    opts.clip = opt_num(c.field, "clip").value_or(1e-3);
    opts.tol = opt_num(c.field, "tol").value_or(1e-8);
    opts.max_cells = c.max_cells;
    const FieldPanel fp = simulate_field_panel(model, c.sizes.L, c.sizes.N, Stream(c.seed), opts);
    const auto& A = fp.aggregate;
    write_f64(o.path("field.f64"), std::span<const double>(A.data(), static_cast<std::size_t>(A.size())));
    write_f64(o.path("coeffs.f64"), fp.coeffs);
    std::vector<double> ns, sums;
    for (std::size_t m : powers_of_two_upto(static_cast<std::size_t>(c.sizes.L), 1)) {
        ns.push_back(static_cast<double>(m));
        sums.push_back(rectangle_sum(A, 0, 0, static_cast<int>(m), static_cast<int>(m)));
    }
    write_csv(o.path("rectangle.csv"), {"n", "sum"}, {ns, sums});
    json res{{"variant", to_string(model.variant)},
             {"L", c.sizes.L},
             {"N", c.sizes.N},
             {"clip_count", fp.clip_count},
             {"exponent", fp.exponent},
             {"max_window", fp.windows.empty() ? 0 : *std::max_element(fp.windows.begin(), fp.windows.end())}};
    if (model.mixing) {
        if (auto beta = tail_exponent(*model.mixing)) {
            try {
                const auto se = scaling_exponents(model.variant, innovation_alpha(model.innovation), *beta);
                res["scaling"] = {{"H1", se.H1}, {"H2", se.H2}, {"isotropic", se.isotropic}};
            } catch (const std::invalid_argument& e) {
                res["scaling_note"] = e.what();
            }
        }
    }
    return res;
}

std::string status_of(int code) {
    switch (code) {
        case kExitOk: return "ok";
        case kExitInvalidConfig: return "invalid-config";
        case kExitResourceCap: return "resource-cap";
        default: return "numerical-failure";
    }
}

}  // namespace

std::string to_string(Kind k) {
    switch (k) {
        case Kind::Simulate: return "simulate";
        case Kind::Aggregate: return "aggregate";
        case Kind::Diagnose: return "diagnose";
        case Kind::Disaggregate: return "disaggregate";
        case Kind::Field: return "field";
        case Kind::Report: return "report";
    }
    return "?";
}

Kind kind_from_string(const std::string& s) {
    for (Kind k : {Kind::Simulate, Kind::Aggregate, Kind::Diagnose, Kind::Disaggregate, Kind::Field, Kind::Report})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

ExperimentConfig parse_config(Kind kind, const json& j, const fs::path& base_dir, const Overrides& ov) {
    try {
        check_keys(j, kTopKeys, "config");
        ExperimentConfig c;
        c.kind = kind;
        if (j.contains("kind"))
            require(kind_from_string(j.at("kind").get<std::string>()) == kind, "config kind does not match the command");
        c.seed = ov.seed ? *ov.seed : j.value("seed", std::uint64_t{0});
        const std::optional<unsigned> env = env_workers();
        c.workers = ov.workers ? *ov.workers : env ? *env : j.value("workers", 1u);
        require(c.workers >= 1, "workers must be positive");
        if (ov.out) c.out = *ov.out;
        else if (j.contains("out")) {
            c.out = j.at("out").get<std::string>();
            if (c.out.is_relative()) c.out = base_dir / c.out;
        }
        require(!c.out.empty(), "an output directory is required (config \"out\" or --out)");
        if (j.contains("mixing")) c.mixing = mixing_from_json(j.at("mixing"), base_dir);
        if (j.contains("innovation")) {
            c.innovation = innovation_from_json(j.at("innovation"));
            validate(*c.innovation);
        }
        if (j.contains("sizes")) {
            const json& s = j.at("sizes");
            check_keys(s, {"N", "n", "L", "replicates"}, "sizes");
            c.sizes.N = size_value(s, "N", 0);
            c.sizes.n = size_value(s, "n", 0);
            c.sizes.L = static_cast<int>(size_value(s, "L", 0));
            c.sizes.replicates = size_value(s, "replicates", 1);
        }
        if (j.contains("scheme")) c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        c.max_cells = size_value(j, "max_cells", c.max_cells);
        if (j.contains("diagnose")) c.diagnose = j.at("diagnose");
        if (j.contains("disaggregate")) c.disaggregate = j.at("disaggregate");
        if (j.contains("field")) c.field = j.at("field");
        validate_kind(c);

        c.echo = j;
        c.echo["kind"] = to_string(kind);
        c.echo["seed"] = c.seed;
        c.echo["workers"] = c.workers;
        c.echo["out"] = c.out.string();
        if (c.mixing) c.echo["mixing"] = to_json(*c.mixing);
        if (c.innovation) c.echo["innovation"] = to_json(*c.innovation);
        return c;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config(Kind kind, const fs::path& file, const Overrides& ov) {
    json j;
    try {
        j = read_json(file);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(kind, j, fs::absolute(file).parent_path(), ov);
}

std::string render_summary(const json& manifest, const json& results) {
    std::ostringstream s;
    s << "aggrolab " << manifest.value("kind", "?") << " run\n";
    s << "status: " << manifest.value("status", "?") << "\n";
    s << "seed: " << manifest.value("seed", std::uint64_t{0}) << "\n";
    if (manifest.contains("error")) s << "error: " << manifest.at("error").dump() << "\n";
    if (!results.is_null()) {
        s << "\nresults:\n";
        for (const auto& [k, v] : results.items()) s << "  " << k << ": " << v.dump() << "\n";
    }
    if (manifest.contains("outputs")) {
        s << "\noutputs:\n";
        for (const auto& f : manifest.at("outputs")) s << "  " << f.at("file").get<std::string>() << "\n";
    }
    return s.str();
}

int run(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out);
    RunLock lock(cfg.out);
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    Outputs o{cfg.out, {}};
    json results;
    int code = kExitOk;
    json error;
    try {
        switch (cfg.kind) {
            case Kind::Simulate: results = run_simulate(cfg, o); break;
            case Kind::Aggregate: results = run_aggregate(cfg, o); break;
            case Kind::Diagnose: results = run_diagnose(cfg, o); break;
            case Kind::Disaggregate: results = run_disaggregate(cfg, o); break;
            case Kind::Field: results = run_field(cfg, o); break;
            case Kind::Report: throw std::invalid_argument("report runs through cli::report");
        }
    } catch (const std::invalid_argument& e) {
        code = kExitInvalidConfig;
        error = {{"type", "invalid_argument"}, {"message", e.what()}};
    } catch (const ResourceLimitError& e) {
        code = kExitResourceCap;
        error = {{"type", "resource_limit"}, {"message", e.what()}};
    } catch (const std::bad_alloc&) {
        code = kExitResourceCap;
        error = {{"type", "resource_limit"}, {"message", "allocation failed"}};
    } catch (const std::exception& e) {
        code = kExitNumerical;
        error = {{"type", "numerical"}, {"message", e.what()}};
    }
    if (code == kExitOk) write_json(o.path("results.json"), results);

    json manifest{{"kind", to_string(cfg.kind)},
                  {"status", status_of(code)},
                  {"exit_code", code},
                  {"seed", cfg.seed},
                  {"config", cfg.echo},
                  {"versions", versions()},
                  {"timing",
                   {{"started", started},
                    {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}}}};
    if (code != kExitOk) manifest["error"] = error;
    const fs::path summary = o.path("summary.txt");
    json listed = manifest;
    listed["outputs"] = json::array();
    for (const auto& f : o.files) listed["outputs"].push_back({{"file", f}});
    write_text(summary, render_summary(listed, code == kExitOk ? results : json()));
    manifest["outputs"] = file_entries(cfg.out, o.files);
    write_json(cfg.out / "manifest.json", manifest);
    if (code != kExitOk) std::cerr << "aggrolab: " << error.at("message").get<std::string>() << "\n";
    return code;
}

int report(const fs::path& run_dir) {
    const json manifest = read_json(run_dir / "manifest.json");
    const fs::path rp = run_dir / "results.json";
    const json results = fs::exists(rp) ? read_json(rp) : json();
    bool intact = true;
    for (const auto& f : manifest.value("outputs", json::array())) {
        const std::string name = f.at("file").get<std::string>();
        if (name == "summary.txt") continue;
        const fs::path p = run_dir / name;
        if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) {
            std::cerr << "aggrolab: output changed since the run: " << name << "\n";
            intact = false;
        }
    }
    write_text(run_dir / "summary.txt", render_summary(manifest, results));
    return intact ? kExitOk : kExitNumerical;
}

int main(int argc, char** argv) {
    CLI::App app{"Aggregation of random-coefficient AR(1) processes"};
    std::string kind_name, config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    app.add_option("kind", kind_name, "simulate, aggregate, diagnose, disaggregate, field or report")->required();
    app.add_option("--config", config, "JSON config file (for report: the run directory or its manifest)")
        ->required();
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalidConfig;
    }
    try {
        const Kind kind = kind_from_string(kind_name);
        if (kind == Kind::Report) {
            fs::path p = config;
            if (fs::is_regular_file(p)) p = p.parent_path();
            if (!fs::exists(p / "manifest.json")) throw std::invalid_argument("no manifest.json in " + p.string());
            return report(p);
        }
        Overrides ov;
        ov.seed = seed;
        ov.workers = workers;
        if (out) ov.out = fs::path(*out);
        return run(load_config(kind, config, ov));
    } catch (const std::invalid_argument& e) {
        std::cerr << "aggrolab: invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const ResourceLimitError& e) {
        std::cerr << "aggrolab: " << e.what() << "\n";
        return kExitResourceCap;
    } catch (const std::exception& e) {
        std::cerr << "aggrolab: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace aggrolab::cli
