#include "balsel/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "balsel/balancing.hpp"
#include "balsel/evaluation.hpp"
#include "balsel/gramian.hpp"
#include "balsel/selection.hpp"
#include "balsel/textio.hpp"

namespace balsel {

namespace fs = std::filesystem;

namespace {

std::string join_one_based(const std::vector<Index>& idx, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? sep : "") + std::to_string(idx[i] + 1);
    return s;
}

std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
    return s;
}

enum class Metric { logdet, trace };

Metric parse_metric(const std::string& m, const char* who) {
    if (m == "logdet") return Metric::logdet;
    if (m == "trace") return Metric::trace;
    throw DomainError(std::string(who) + ": metric '" + m + "' is not available here (use logdet or trace)");
}

double subset_objective(const Matrix& gram, std::span<const Index> sorted, Metric metric) {
    if (metric == Metric::logdet) return cholesky_logdet(gram, sorted);
    double s = 0.0;
    for (Index i : sorted) s += gram(i, i).real();
    return s;
}

std::vector<Index> sorted_copy(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Opens cfg.out as a file, or falls back to the log stream when unset.
class OutputFile {
public:
    OutputFile(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os_ = &fallback;
            return;
        }
        if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
        file_.open(path);
        if (!file_) throw DomainError("cannot write " + path);
        os_ = &file_;
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

fs::path output_dir(const RunConfig& cfg) {
    fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
    fs::create_directories(dir);
    return dir;
}

Index require_rank(const RunConfig& cfg, const char* who) {
    if (cfg.rank < 1) throw DomainError(std::string(who) + ": --rank must be at least 1");
    return cfg.rank;
}

std::uint64_t mix_seed(std::uint64_t seed, Index r) {
    // distinct, reproducible stream per (seed, r)
    return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r);
}

}  // namespace

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.size() != 4 && parts.size() != 5)
        throw ParseError("--generate expects n,p,q,seed[,discrete], got '" + text + "'");
    auto as_int = [&](const std::string& s) -> long long {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            throw ParseError("--generate: bad integer '" + s + "'");
        }
        if (used != s.size() || v < 0) throw ParseError("--generate: bad integer '" + s + "'");
        return v;
    };
    GeneratorSpec g;
    g.n = static_cast<Index>(as_int(parts[0]));
    g.p = static_cast<Index>(as_int(parts[1]));
    g.q = static_cast<Index>(as_int(parts[2]));
    g.seed = static_cast<std::uint64_t>(as_int(parts[3]));
    if (parts.size() == 5) {
        if (parts[4] == "discrete")
            g.domain = TimeDomain::discrete;
        else if (parts[4] != "continuous")
            throw ParseError("--generate: time domain must be 'discrete' or 'continuous'");
    }
    if (g.n < 1 || g.p < 1 || g.q < 1) throw ParseError("--generate: n, p, q must be positive");
    return g;
}

StateSpaceModel load_model(const RunConfig& cfg) {
    const bool file = !cfg.model_path.empty();
    const bool gen = cfg.generate.has_value();
    if (file == gen) throw DomainError("exactly one of --model and --generate is required");
    if (file) return read_model_file(cfg.model_path);
    const GeneratorSpec& g = *cfg.generate;
    return random_stable_system(g.n, g.p, g.q, g.seed, g.domain);
}

GinzburgLandauParams load_gl_params(const std::string& path) {
    GinzburgLandauParams p;
    if (path.empty()) return p;
    const KeyValues kv = read_key_values_file(path);
    auto real = [](const std::string& k, const std::string& v) {
        const auto list = parse_number_list(v);
        if (list.size() != 1) throw ParseError("gl-params: '" + k + "' expects one number");
        return list[0];
    };
    for (const auto& [k, v] : kv) {
        if (k == "n") p.n = static_cast<Index>(real(k, v));
        else if (k == "nu") p.nu = parse_complex(v);
        else if (k == "beta_diff") p.beta_diff = parse_complex(v);
        else if (k == "mu0") p.mu0 = real(k, v);
        else if (k == "mu1") p.mu1 = real(k, v);
        else if (k == "mu2") p.mu2 = real(k, v);
        else if (k == "kernel_width") p.kernel_width = real(k, v);
        else if (k == "grid_scale") p.grid_scale = real(k, v);
        else if (k == "q_weight") p.q_weight = real(k, v);
        else if (k == "r_weight") p.r_weight = real(k, v);
        else if (k == "w_cov") p.w_cov = real(k, v);
        else if (k == "v_cov") p.v_cov = real(k, v);
        else if (k == "swap_noise") {
            if (v == "true" || v == "1") p.swap_noise = true;
            else if (v == "false" || v == "0") p.swap_noise = false;
            else throw ParseError("gl-params: swap_noise expects true or false");
        } else
            throw ParseError("gl-params: unknown key '" + k + "'");
    }
    p.validate();
    return p;
}

void cmd_gramians(const RunConfig& cfg, std::ostream& log) {
    const StateSpaceModel m = load_model(cfg);
    const GramianPair w = compute_gramians(m);
    if (cfg.out.empty()) {
        log << "# controllability gramian\n";
        write_matrix(log, w.w_c);
        log << "# observability gramian\n";
        write_matrix(log, w.w_o);
    } else {
        const fs::path dir = output_dir(cfg);
        write_matrix_file(dir / "wc.txt", w.w_c);
        write_matrix_file(dir / "wo.txt", w.w_o);
        log << "wrote " << (dir / "wc.txt").string() << " and " << (dir / "wo.txt").string() << '\n';
    }
    log << "residual_c=" << format_real(w.residual_c) << " residual_o=" << format_real(w.residual_o) << '\n';
}

void cmd_select(const RunConfig& cfg, std::ostream& log) {
    const Index r = require_rank(cfg, "select");
    const StateSpaceModel m = load_model(cfg);
    const GramianPair w = compute_gramians(m);
    const BalancedRealization bal = balance(w, r);
    const SelectionResult sel = cfg.no_collocate ? select_noncollocated(m.c(), m.b(), bal.psi_r, bal.phi_r)
                                                 : select_collocated(m.c(), m.b(), bal.psi_r, bal.phi_r);
    const ObjectiveReport rep = evaluate_selection(m, w, sel);

    log << "gamma " << join_one_based(sel.gamma) << '\n';
    log << "beta " << join_one_based(sel.beta) << '\n';
    log << "r_diag_sensors " << join_reals(sel.r_diag_sensors) << '\n';
    log << "r_diag_actuators " << join_reals(sel.r_diag_actuators) << '\n';
    log << "logdet_sensor " << format_real(rep.logdet_sensor) << '\n';
    log << "logdet_actuator " << format_real(rep.logdet_actuator) << '\n';
    log << "trace_sensor " << format_real(rep.trace_sensor) << '\n';
    log << "bound_output_error " << format_real(theorem2_bound(m.c(), bal.psi_r, bal.hankel)) << '\n';
    log << "bound_input_error " << format_real(corollary1_bound(m.b(), bal.phi_r, bal.hankel)) << '\n';
    log << "lower_bound_logdet_sensor " << format_real(theorem3_lower_bound(m.c(), bal.psi_r, bal.hankel)) << '\n';
    log << "lower_bound_logdet_actuator " << format_real(corollary2_lower_bound(m.b(), bal.phi_r, bal.hankel))
        << '\n';

    if (!cfg.out.empty()) {
        OutputFile f(cfg.out, log);
        CsvWriter csv(f.stream(), {"side", "position", "index", "r_diag"});
        auto rows = [&](const char* side, const std::vector<Index>& idx, const std::vector<double>& d) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                csv.cell(std::string(side)).cell(static_cast<long long>(i + 1)).cell(idx[i] + 1).cell(d[i]);
                csv.end_row();
            }
        };
        rows("sensor", sel.gamma, sel.r_diag_sensors);
        rows("actuator", sel.beta, sel.r_diag_actuators);
    }
}

void cmd_bruteforce(const RunConfig& cfg, std::ostream& log) {
    const Index budget = cfg.budget > 0 ? cfg.budget : require_rank(cfg, "bruteforce");
    const Metric metric = parse_metric(cfg.metric, "bruteforce");
    const std::uint64_t cap = cfg.cap.value_or(enumeration_cap());
    const StateSpaceModel m = load_model(cfg);
    const GramianPair w = compute_gramians(m);
    const Matrix gram = output_gram(m, w, Side::sensor);
    const Index p = gram.rows();
    if (budget > p) throw DomainError("bruteforce: budget exceeds the number of sensors");

    std::vector<double> values;
    std::vector<Index> best;
    double best_value = 0.0;
    if (metric == Metric::logdet) {
        BruteForceResult bf = brute_force(gram, budget, cap);
        values = std::move(bf.values);
        best = std::move(bf.best_indices);
        best_value = bf.best_value;
    } else {
        const std::uint64_t total = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(budget));
        if (total > cap)
            throw SizeError("bruteforce: " + std::to_string(total) + " subsets exceed the cap of " +
                            std::to_string(cap) + "; use bench-random or raise --cap");
        std::vector<Index> cur(static_cast<std::size_t>(budget));
        std::iota(cur.begin(), cur.end(), Index{0});
        best_value = -std::numeric_limits<double>::infinity();
        while (true) {
            const double v = subset_objective(gram, cur, metric);
            values.push_back(v);
            if (best.empty() || v > best_value) {
                best_value = v;
                best = cur;
            }
            Index k = budget - 1;
            while (k >= 0 && cur[static_cast<std::size_t>(k)] == p - budget + k) --k;
            if (k < 0) break;
            ++cur[static_cast<std::size_t>(k)];
            for (Index j = k + 1; j < budget; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    // QR reference selection at the same budget
    const BalancedRealization bal = balance(w, budget);
    const std::vector<Index> qr = sorted_copy(select_sensors(m.c(), bal.psi_r).indices);
    const double qr_value = subset_objective(gram, qr, metric);
    const double pct = percentile_of(values, qr_value);

    {
        OutputFile f(cfg.out, log);
        CsvWriter csv(f.stream(), {"subset_id", "value"});
        for (std::size_t i = 0; i < values.size(); ++i) {
            csv.cell(static_cast<long long>(i)).cell(values[i]);
            csv.end_row();
        }
    }
    std::ostringstream summary;
    {
        CsvWriter csv(summary, {"count", "best_value", "best_indices", "qr_value", "qr_indices", "percentile"});
        csv.cell(static_cast<long long>(values.size()))
            .cell(best_value)
            .cell(join_one_based(best, ";"))
            .cell(qr_value)
            .cell(join_one_based(qr, ";"))
            .cell(pct);
        csv.end_row();
    }
    if (!cfg.out.empty()) {
        fs::path sp(cfg.out);
        sp.replace_filename(sp.stem().string() + "_summary.csv");
        std::ofstream(sp) << summary.str();
    }
    log << "best " << format_real(best_value) << " at " << join_one_based(best) << '\n';
    log << "qr " << format_real(qr_value) << " at " << join_one_based(qr) << '\n';
    log << "percentile " << format_real(pct) << '\n';
}

void cmd_bench_random(const RunConfig& cfg, std::ostream& log) {
    const Metric metric = parse_metric(cfg.metric, "bench-random");
    if (!cfg.generate) throw DomainError("bench-random: --generate n,p,q,seed[,discrete] is required");
    const GeneratorSpec g = *cfg.generate;
    const Index r_max = cfg.rank > 0 ? cfg.rank : 10;
    if (cfg.ensemble_count < 1) throw DomainError("bench-random: --ensemble-count must be at least 1");
    const std::vector<std::uint64_t> seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{g.seed} : cfg.seeds;
    const Index r_min = cfg.budget > 0 ? cfg.budget : 1;  // --budget pins a single r
    const Index r_hi = cfg.budget > 0 ? cfg.budget : r_max;

    OutputFile f(cfg.out, log);
    CsvWriter csv(f.stream(), {"seed", "r", "qr_value", "sample_id", "sample_value"});
    for (std::uint64_t seed : seeds) {
        const StateSpaceModel m = random_stable_system(g.n, g.p, g.q, seed, g.domain);
        const GramianPair w = compute_gramians(m);
        const Matrix gs = output_gram(m, w, Side::sensor);
        const Matrix ga = output_gram(m, w, Side::actuator);
        for (Index r = r_min; r <= r_hi; ++r) {
            const BalancedRealization bal = balance(w, r);
            const SelectionResult sel = select_collocated(m.c(), m.b(), bal.psi_r, bal.phi_r);
            const double qr_value = subset_objective(gs, sorted_copy(sel.gamma), metric) +
                                    subset_objective(ga, sorted_copy(sel.beta), metric);
            csv.cell(static_cast<long long>(seed)).cell(r).cell(qr_value).cell(-1).cell(qr_value);
            csv.end_row();
            SubsetSampler sampler(mix_seed(seed, r));
            std::vector<double> samples;
            for (Index s = 0; s < cfg.ensemble_count; ++s) {
                const double v = subset_objective(gs, sampler.draw(gs.rows(), r), metric) +
                                 subset_objective(ga, sampler.draw(ga.rows(), r), metric);
                samples.push_back(v);
                csv.cell(static_cast<long long>(seed)).cell(r).cell(qr_value).cell(s).cell(v);
                csv.end_row();
            }
            if (!cfg.out.empty())
                log << "seed " << seed << " r " << r << " qr " << format_real(qr_value) << " median "
                    << format_real(median(samples)) << " percentile " << format_real(percentile_of(samples, qr_value))
                    << '\n';
        }
    }
}

void cmd_gl_demo(const RunConfig& cfg, std::ostream& log) {
    const GinzburgLandauParams params = load_gl_params(cfg.gl_params);
    const Index r_max = cfg.rank > 0 ? cfg.rank : 5;
    FrequencyGrid omegas;
    if (cfg.freq_grid.empty()) {
        omegas.points = {1e-1, 1e1, 1e3};
    } else {
        const auto v = parse_number_list(cfg.freq_grid);
        if (v.size() != 3 || !(v[0] > 0.0) || !(v[1] >= v[0]) || v[2] < 1.0)
            throw ParseError("--freq-grid expects lo,hi,count with 0 < lo <= hi and count >= 1");
        omegas = FrequencyGrid::logspace(v[0], v[1], static_cast<std::size_t>(v[2]));
    }

    const GLPipeline pipe = gl_prepare(params);
    log << "open_loop_unstable " << (is_stable_matrix(pipe.plant.a, TimeDomain::continuous) ? 0 : 1) << '\n';
    log << "full_lqg_h2 " << format_real(pipe.full_h2) << '\n';

    const fs::path dir = output_dir(cfg);
    std::ofstream pf(dir / "gl_placements.csv");
    CsvWriter place(pf, {"r", "role", "order", "index", "coordinate", "h2", "stable"});
    GLPlacement last;
    for (Index r = 1; r <= r_max; ++r) {
        GLPlacement g;
        try {
            g = gl_place(pipe, r, cfg.no_collocate);
        } catch (const Error& e) {
            log << "r " << r << " failed: " << e.what() << '\n';
            continue;
        }
        auto rows = [&](const char* role, const std::vector<Index>& idx, const std::vector<double>& x) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                place.cell(r).cell(std::string(role)).cell(static_cast<long long>(i + 1)).cell(idx[i] + 1).cell(x[i])
                    .cell(g.h2).cell(g.stable ? 1 : 0);
                place.end_row();
            }
        };
        rows("sensor", g.sensors, g.sensor_coords);
        rows("actuator", g.actuators, g.actuator_coords);
        log << "r " << r << " h2 " << format_real(g.h2) << " stable " << (g.stable ? 1 : 0) << " sensors "
            << join_reals(g.sensor_coords) << " actuators " << join_reals(g.actuator_coords) << '\n';
        last = std::move(g);
    }

    if (!last.sensors.empty()) {
        const ClosedLoop loop = closed_loop_assemble(pipe.plant, pipe.full, last.sensors, last.actuators);
        const GainGrid gg = lqg_gain_grid(loop, pipe.plant.grid, last.sensors, last.actuators, omegas);
        std::ofstream gf(dir / "gl_gains.csv");
        CsvWriter gains(gf, {"omega", "actuator_order", "sensor_order", "actuator_coordinate", "sensor_coordinate",
                             "gain_db"});
        for (std::size_t k = 0; k < gg.omegas.size(); ++k)
            for (std::size_t j = 0; j < gg.actuators.size(); ++j)
                for (std::size_t s = 0; s < gg.sensors.size(); ++s) {
                    gains.cell(gg.omegas[k])
                        .cell(static_cast<long long>(j + 1))
                        .cell(static_cast<long long>(s + 1))
                        .cell(pipe.plant.grid(gg.actuators[j]))
                        .cell(pipe.plant.grid(gg.sensors[s]))
                        .cell(gg.gains_db[k](static_cast<Index>(j), static_cast<Index>(s)));
                    gains.end_row();
                }
    }
    log << "wrote " << (dir / "gl_placements.csv").string() << '\n';
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_exponent: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

void cmd_scaling(const RunConfig& cfg, std::ostream& log) {
    const Index r_fixed = cfg.rank > 0 ? cfg.rank : 10;
    if (cfg.sizes.empty() || cfg.ranks.empty()) throw DomainError("scaling: empty sweep");
    const Index n_fixed = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
    std::mt19937_64 rng(cfg.seeds.empty() ? 0 : cfg.seeds.front());
    std::normal_distribution<double> normal;

    auto time_once = [&](Index n, Index r) {
        if (r > n) throw DomainError("scaling: rank exceeds size");
        Matrix v(r, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < r; ++i) v(i, j) = Complex(normal(rng), normal(rng));
        double best = std::numeric_limits<double>::infinity();
        for (Index k = 0; k < std::max<Index>(cfg.repeats, 1); ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            const PivotedQR f = pivoted_qr(v);
            const auto t1 = std::chrono::steady_clock::now();
            if (f.pivot_order.empty()) throw NumericError("scaling: empty factorization");
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        }
        return best;
    };

    OutputFile f(cfg.out, log);
    CsvWriter csv(f.stream(), {"sweep", "n", "r", "seconds"});
    std::vector<double> xs, ts;
    for (Index n : cfg.sizes) {
        const double t = time_once(n, r_fixed);
        xs.push_back(static_cast<double>(n));
        ts.push_back(t);
        csv.cell(std::string("n")).cell(n).cell(r_fixed).cell(t);
        csv.end_row();
    }
    std::vector<double> rs, tr;
    for (Index r : cfg.ranks) {
        const double t = time_once(n_fixed, r);
        rs.push_back(static_cast<double>(r));
        tr.push_back(t);
        csv.cell(std::string("r")).cell(n_fixed).cell(r).cell(t);
        csv.end_row();
    }
    // keep stdout pure CSV when no output file was given
    std::ostream& o = cfg.out.empty() ? std::clog : log;
    if (xs.size() >= 2) o << "exponent_n " << format_real(fit_exponent(xs, ts)) << '\n';
    if (rs.size() >= 2) o << "exponent_r " << format_real(fit_exponent(rs, tr)) << '\n';
}

int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (cfg.command == "gramians") cmd_gramians(cfg, log);
        else if (cfg.command == "select") cmd_select(cfg, log);
        else if (cfg.command == "bruteforce") cmd_bruteforce(cfg, log);
        else if (cfg.command == "bench-random") cmd_bench_random(cfg, log);
        else if (cfg.command == "gl-demo") cmd_gl_demo(cfg, log);
        else if (cfg.command == "scaling") cmd_scaling(cfg, log);
        else throw ParseError("unknown command '" + cfg.command + "'");
        return exit_ok;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_parse;
    } catch (const SizeError& e) {
        err << "size limit: " << e.what() << '\n';
        return exit_cap;
    } catch (const RankError& e) {
        err << "rank error: " << e.what() << " (largest admissible rank: " << e.max_admissible() << ")\n";
        return exit_domain;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::exception& e) {
        err << "unexpected failure: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace balsel
