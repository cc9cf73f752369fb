// Command-line front end for the planeparts library.
//
// Subcommands:
//   sample        draw plane partitions at q (or q = e^{-r})
//   limit-shape   tabulate bulk-region membership and particle density
//   kernel        evaluate one kernel entry (finite-q contour or bulk sine)
//   lln           law-of-large-numbers experiment over a list of scales
//   oracle        exhaustive plane-partition counts (two generators)
//
// Every data file starts with the effective configuration echoed as
// "# config.<key> = <value>" lines; identical configurations produce
// byte-identical files.  Wall-clock timestamps appear only in the sidecar
// log "<out>.log" written next to --out.
//
// Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "planeparts/bulkgeom.hpp"
#include "planeparts/kernels.hpp"
#include "planeparts/lln.hpp"
#include "planeparts/qspecial.hpp"
#include "planeparts/sampler.hpp"

namespace {

using namespace planeparts;

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Lattice points on the command line use the doubled-height syntax "t:2h"
// (both coordinates integer), e.g. "0:1" for (t, h) = (0, 1/2).
LatticePoint parse_point(const std::string& token, const char* flag) {
    LatticePoint p;
    int consumed = 0;
    if (std::sscanf(token.c_str(), "%d:%d%n", &p.t, &p.h2, &consumed) != 2 ||
        consumed != static_cast<int>(token.size())) {
        throw std::invalid_argument(std::string(flag) + ": expected \"t:2h\" with integer entries, got \"" +
                                    token + "\"");
    }
    return p;
}

Pattern parse_pattern(const std::string& spec) {
    std::vector<LatticePoint> offsets;
    std::istringstream is(spec);
    std::string token;
    while (std::getline(is, token, ',')) {
        if (!token.empty()) offsets.push_back(parse_point(token, "--pattern"));
    }
    return Pattern(std::move(offsets));  // validates occupancy and distinctness
}

std::string point_str(const LatticePoint& p) {
    return std::to_string(p.t) + ":" + std::to_string(p.h2);
}

std::string pattern_str(const Pattern& m) {
    if (m.empty()) return "(empty)";
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s += ',';
        s += point_str(m.offsets()[i]);
    }
    return s;
}

/// Buffers one data file (config echo + payload) and flushes it in a single
/// write, so partially written files never appear on disk.
class Output {
  public:
    Output(std::string command, std::string path)
        : command_(std::move(command)), path_(std::move(path)) {
        config("command", command_);
    }

    void config(const std::string& key, const std::string& value) {
        header_ += "# config." + key + " = " + value + "\n";
    }
    void config(const std::string& key, const char* value) { config(key, std::string(value)); }
    void config(const std::string& key, double value) { config(key, g17(value)); }
    void config(const std::string& key, int value) {
        config(key, std::to_string(value));
    }
    void config(const std::string& key, std::uint64_t value) {
        config(key, std::to_string(value));
    }

    // Extra text for the sidecar log line (execution details such as the
    // worker-thread count, which must not influence the data file).
    void sidecar_note(const std::string& note) { sidecar_note_ = note; }

    std::ostream& body() { return body_; }

    void flush() {
        const std::string data = header_ + body_.str();
        if (path_.empty()) {
            std::cout << data;
            std::cout.flush();
            return;
        }
        std::ofstream ofs(path_, std::ios::binary | std::ios::trunc);
        if (!ofs) throw std::runtime_error("cannot open output file '" + path_ + "'");
        ofs << data;
        ofs.flush();
        if (!ofs) throw std::runtime_error("failed while writing output file '" + path_ + "'");
        write_sidecar_log(data.size());
    }

  private:
    // Timestamps live here and only here; the data file stays reproducible.
    void write_sidecar_log(std::size_t bytes) const {
        std::ofstream log(path_ + ".log", std::ios::app);
        if (!log) return;  // best-effort; the data file is authoritative
        char stamp[32] = "unknown-time";
        const std::time_t now = std::time(nullptr);
        if (std::tm tm{}; gmtime_r(&now, &tm) != nullptr) {
            std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        }
        log << stamp << " " << command_ << sidecar_note_ << " wrote " << bytes << " bytes\n";
    }

    std::string command_;
    std::string path_;
    std::string header_;
    std::string sidecar_note_;
    std::ostringstream body_;
};

// Exactly one of --q / --r selects the weight parameter.
QParameter q_from_flags(const CLI::App* sub, double q_value, double r_value) {
    const bool has_q = sub->count("--q") > 0;
    const bool has_r = sub->count("--r") > 0;
    if (has_q == has_r) {
        throw std::invalid_argument("exactly one of --q / --r must be given");
    }
    if (has_q) {
        if (!(q_value > 0.0) || !(q_value < 1.0)) {
            throw std::invalid_argument("--q must lie strictly between 0 and 1");
        }
        return QParameter::from_q(q_value);
    }
    if (!(r_value > 0.0) || !std::isfinite(r_value)) {
        throw std::invalid_argument("--r must be positive and finite");
    }
    return QParameter::from_r(r_value);
}

void validate_delta(double delta) {
    if (!(delta > 0.0) || !(delta <= 0.1)) {
        throw std::invalid_argument("--delta must lie in (0, 0.1]");
    }
}

void validate_tol(double tol) {
    if (!(tol > 0.0) || !(tol <= 0.1)) {
        throw std::invalid_argument("--tol must lie in (0, 0.1]");
    }
}

// ------------------------------------------------------------------ sample

void cmd_sample(const QParameter& q, int n, std::uint64_t seed, double delta,
                const std::string& stats, const std::string& out_path) {
    if (n < 1) throw std::invalid_argument("--n must be at least 1");
    validate_delta(delta);
    if (!stats.empty() && stats != "volume") {
        throw std::invalid_argument("--stats must be \"volume\" when given");
    }

    Output out("sample", out_path);
    out.config("q", q.q);
    out.config("r", q.r);
    out.config("n", n);
    out.config("seed", seed);
    out.config("delta", delta);
    out.config("stats", stats.empty() ? "(none)" : stats);

    if (stats == "volume") {
        std::map<long long, long long> histogram;
        for (int k = 0; k < n; ++k) {
            const PlanePartition pi =
                sample_plane_partition(q, delta, RngStream{seed, static_cast<std::uint64_t>(k)});
            ++histogram[pi.volume()];
        }
        out.body() << "volume,count\n";
        for (const auto& [volume, count] : histogram) {
            out.body() << volume << "," << count << "\n";
        }
    } else {
        for (int k = 0; k < n; ++k) {
            const PlanePartition pi =
                sample_plane_partition(q, delta, RngStream{seed, static_cast<std::uint64_t>(k)});
            write_plane_partition(out.body(), pi);
        }
    }
    out.flush();
}

// ------------------------------------------------------------- limit-shape

void cmd_limit_shape(double tau_min, double tau_max, double chi_min, double chi_max,
                     double grid_step, const std::string& out_path) {
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw std::invalid_argument("--grid-step must be positive and finite");
    }
    if (!(tau_max >= tau_min)) {
        throw std::invalid_argument("--tau-max must not be below --tau-min");
    }
    if (!(chi_max >= chi_min)) {
        throw std::invalid_argument("--chi-max must not be below --chi-min");
    }
    const long long n_tau =
        static_cast<long long>(std::floor((tau_max - tau_min) / grid_step + 1e-9)) + 1;
    const long long n_chi =
        static_cast<long long>(std::floor((chi_max - chi_min) / grid_step + 1e-9)) + 1;
    if (n_tau * n_chi > 4'000'000) {
        throw std::invalid_argument("--grid-step too small for the requested box (over 4e6 nodes)");
    }

    Output out("limit-shape", out_path);
    out.config("tau_min", tau_min);
    out.config("tau_max", tau_max);
    out.config("chi_min", chi_min);
    out.config("chi_max", chi_max);
    out.config("grid_step", grid_step);

    out.body() << "tau,chi,in_A,density\n";
    for (long long i = 0; i < n_tau; ++i) {
        const double tau = tau_min + static_cast<double>(i) * grid_step;
        for (long long j = 0; j < n_chi; ++j) {
            const double chi = chi_min + static_cast<double>(j) * grid_step;
            const bool in_a = in_region_A(tau, chi);
            out.body() << g17(tau) << "," << g17(chi) << "," << (in_a ? 1 : 0) << ",";
            if (in_a) out.body() << g17(density(tau, chi));
            out.body() << "\n";
        }
    }
    out.flush();
}

// ------------------------------------------------------------------ kernel

void cmd_kernel_sine(int dt, double dh, double tau, double chi, double tol,
                     const std::string& out_path) {
    validate_tol(tol);
    const long long dh2_ll = std::llround(2.0 * dh);
    if (std::abs(2.0 * dh - static_cast<double>(dh2_ll)) > 1e-9) {
        throw std::invalid_argument("--dh must be an integer multiple of 1/2");
    }
    const int dh2 = static_cast<int>(dh2_ll);
    if (((dt + dh2) % 2 + 2) % 2 != 0) {
        throw std::invalid_argument("--dt/--dh: 2*dh + dt must be even (lattice parity)");
    }
    const BulkPoint bp = BulkPoint::at(tau, chi);  // domain_error outside A
    const QuadratureConfig cfg{64, 14, tol};
    const Complex value = kernel_sine(dt, dh2, bp, cfg);

    Output out("kernel", out_path);
    out.config("type", "sine");
    out.config("dt", dt);
    out.config("dh", dh);
    out.config("tau", tau);
    out.config("chi", chi);
    out.config("tol", tol);
    out.body() << "value_re = " << g17(value.real()) << "\n";
    out.body() << "value_im = " << g17(value.imag()) << "\n";
    if (dt == 0) {
        out.body() << "closed_form = " << g17(kernel_sine_equal_time(dh2 / 2, bp)) << "\n";
    }
    out.flush();
}

void cmd_kernel_finite(const QParameter& q, const std::string& p1_spec, const std::string& p2_spec,
                       double tol, const std::string& out_path) {
    validate_tol(tol);
    const LatticePoint p1 = parse_point(p1_spec, "--p1");
    const LatticePoint p2 = p2_spec.empty() ? p1 : parse_point(p2_spec, "--p2");
    const QuadratureConfig cfg{64, 14, tol};
    const Complex value = kernel_Kq(p1, p2, q, cfg);

    Output out("kernel", out_path);
    out.config("type", "finite");
    out.config("q", q.q);
    out.config("r", q.r);
    out.config("p1", point_str(p1));
    out.config("p2", point_str(p2));
    out.config("tol", tol);
    out.body() << "value_re = " << g17(value.real()) << "\n";
    out.body() << "value_im = " << g17(value.imag()) << "\n";
    out.flush();
}

// --------------------------------------------------------------------- lln

TestFunction::Family parse_family(const std::string& name) {
    if (name == "cosine-bump") return TestFunction::Family::cosine_bump;
    if (name == "tensor-hat") return TestFunction::Family::tensor_hat;
    if (name == "disk") return TestFunction::Family::constant_on_disk_mollified;
    throw std::invalid_argument("--f-family must be one of: cosine-bump, tensor-hat, disk");
}

void cmd_lln(const std::vector<double>& r_list, int n, std::uint64_t seed, double delta,
             double grid_step, const std::string& pattern_spec, const std::string& f_family,
             const std::vector<double>& f_center, double f_radius, double f_amplitude,
             int threads, const std::string& out_path, const std::string& replicas_path) {
    if (r_list.empty()) throw std::invalid_argument("--r requires at least one scale");
    if (f_center.size() != 2) {
        throw std::invalid_argument("--f-center expects two values \"tau,chi\"");
    }
    if (threads < 1) throw std::invalid_argument("--threads must be at least 1");
    validate_delta(delta);

    const Pattern m = parse_pattern(pattern_spec);
    const TestFunction f(parse_family(f_family), f_center[0], f_center[1], f_radius, f_amplitude);

    const ExperimentReport report =
        run_lln_experiment(f, m, r_list, n, seed, threads, delta, grid_step);

    auto echo_config = [&](Output& out) {
        std::string r_joined;
        for (std::size_t i = 0; i < r_list.size(); ++i) {
            if (i) r_joined += ',';
            r_joined += g17(r_list[i]);
        }
        out.config("r_list", r_joined);
        out.config("n", n);
        out.config("seed", seed);
        out.config("delta", delta);
        out.config("grid_step", grid_step);
        out.config("pattern", pattern_str(m));
        out.config("f_family", f_family);
        out.config("f_center", g17(f_center[0]) + "," + g17(f_center[1]));
        out.config("f_radius", f_radius);
        out.config("f_amplitude", f_amplitude);
        // The thread count is logged to the sidecar, not the data file: the
        // reduction is fixed-order, so the data is thread-invariant and two
        // runs differing only in --threads stay byte-identical.
        out.sidecar_note(" threads=" + std::to_string(threads));
    };

    Output out("lln", out_path);
    echo_config(out);
    write_report(out.body(), report);
    out.flush();

    if (!replicas_path.empty()) {
        Output rep("lln-replicas", replicas_path);
        echo_config(rep);
        write_replica_csv(rep.body(), report);
        rep.flush();
    }
}

// ------------------------------------------------------------------ oracle

void cmd_oracle(int max_volume, const std::string& out_path) {
    if (max_volume < 0 || max_volume > 14) {
        throw std::invalid_argument("--max-volume must lie between 0 and 14");
    }
    const std::vector<long long> counts = plane_partition_counts(max_volume);
    const std::vector<long long> series = plane_partition_counts_series(max_volume);
    if (counts != series) {
        throw std::runtime_error("enumeration and series generators disagree");
    }

    Output out("oracle", out_path);
    out.config("max_volume", max_volume);
    out.body() << "n,count\n";
    for (int v = 0; v <= max_volume; ++v) {
        out.body() << v << "," << counts[static_cast<std::size_t>(v)] << "\n";
    }
    out.flush();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "planeparts: geometric-weight random plane partitions, determinantal "
        "kernels, and law-of-large-numbers experiments"};
    app.require_subcommand(1);
    app.set_config("--config", "", "plain-text key=value configuration file");

    // sample
    double s_q = 0.5, s_r = 1.0, s_delta = 1e-8;
    int s_n = 1;
    std::uint64_t s_seed = 0;
    std::string s_stats, s_out;
    CLI::App* sample = app.add_subcommand("sample", "draw plane partitions");
    sample->add_option("--q", s_q, "weight parameter q, strictly between 0 and 1");
    sample->add_option("--r", s_r, "scale r > 0; sets q = exp(-r)");
    sample->add_option("--n", s_n, "number of samples")->capture_default_str();
    sample->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    sample->add_option("--delta", s_delta, "support-truncation tolerance")->capture_default_str();
    sample->add_option("--stats", s_stats, "aggregate instead of raw samples: volume");
    sample->add_option("--out", s_out, "output path (default: stdout)");

    // limit-shape
    double l_tau_min = -2.0, l_tau_max = 2.0, l_chi_min = -2.0, l_chi_max = 1.0;
    double l_step = 0.1;
    std::string l_out;
    CLI::App* limit = app.add_subcommand("limit-shape", "tabulate region membership and density");
    limit->add_option("--tau-min", l_tau_min, "grid lower bound in tau")->capture_default_str();
    limit->add_option("--tau-max", l_tau_max, "grid upper bound in tau")->capture_default_str();
    limit->add_option("--chi-min", l_chi_min, "grid lower bound in chi")->capture_default_str();
    limit->add_option("--chi-max", l_chi_max, "grid upper bound in chi")->capture_default_str();
    limit->add_option("--grid-step", l_step, "grid spacing")->capture_default_str();
    limit->add_option("--out", l_out, "output path (default: stdout)");

    // kernel
    std::string k_type;
    int k_dt = 0;
    double k_dh = 0.0, k_tau = 0.0, k_chi = 0.0, k_tol = 1e-10;
    double k_q = 0.5, k_r = 1.0;
    std::string k_p1, k_p2, k_out;
    CLI::App* kernel = app.add_subcommand("kernel", "evaluate one kernel entry");
    kernel->add_option("--type", k_type, "kernel type: sine or finite")->required();
    kernel->add_option("--dt", k_dt, "time separation (sine)")->capture_default_str();
    kernel->add_option("--dh", k_dh, "height separation, multiple of 1/2 (sine)")
        ->capture_default_str();
    kernel->add_option("--tau", k_tau, "bulk position tau (sine)")->capture_default_str();
    kernel->add_option("--chi", k_chi, "bulk position chi (sine)")->capture_default_str();
    kernel->add_option("--q", k_q, "weight parameter q (finite)");
    kernel->add_option("--r", k_r, "scale r; sets q = exp(-r) (finite)");
    kernel->add_option("--p1", k_p1, "first lattice point \"t:2h\" (finite)");
    kernel->add_option("--p2", k_p2, "second lattice point \"t:2h\" (finite; default --p1)");
    kernel->add_option("--tol", k_tol, "quadrature tolerance")->capture_default_str();
    kernel->add_option("--out", k_out, "output path (default: stdout)");

    // lln
    std::vector<double> ll_r;
    int ll_n = 200, ll_threads = 1;
    std::uint64_t ll_seed = 0;
    double ll_delta = 1e-8, ll_step = 0.02, ll_radius = 0.3, ll_amp = 1.0;
    std::string ll_pattern, ll_family = "cosine-bump", ll_out, ll_replicas;
    std::vector<double> ll_center{0.5, 0.5};
    CLI::App* lln = app.add_subcommand("lln", "law-of-large-numbers experiment");
    lln->add_option("--r", ll_r, "comma-separated scales, strictly decreasing")
        ->required()
        ->delimiter(',');
    lln->add_option("--n", ll_n, "replicas per scale (at least 50)")->capture_default_str();
    lln->add_option("--seed", ll_seed, "RNG seed")->capture_default_str();
    lln->add_option("--delta", ll_delta, "support-truncation tolerance")->capture_default_str();
    lln->add_option("--grid-step", ll_step, "integration grid step")->capture_default_str();
    lln->add_option("--pattern", ll_pattern, "pattern offsets \"t:2h[,t:2h...]\" (default empty)");
    lln->add_option("--f-family", ll_family, "test function: cosine-bump, tensor-hat, disk")
        ->capture_default_str();
    lln->add_option("--f-center", ll_center, "test-function center \"tau,chi\"")
        ->delimiter(',')
        ->capture_default_str();
    lln->add_option("--f-radius", ll_radius, "test-function radius")->capture_default_str();
    lln->add_option("--f-amplitude", ll_amp, "test-function amplitude")->capture_default_str();
    lln->add_option("--threads", ll_threads, "worker threads (result is thread-invariant)")
        ->envname("PLANEPARTS_THREADS")
        ->capture_default_str();
    lln->add_option("--out", ll_out, "report path (default: stdout)");
    lln->add_option("--replicas-out", ll_replicas, "optional per-replica CSV path");

    // oracle
    int o_max_volume = 8;
    std::string o_out;
    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive plane-partition counts");
    oracle->add_option("--max-volume", o_max_volume, "largest volume to enumerate (max 14)")
        ->capture_default_str();
    oracle->add_option("--out", o_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(sample)) {
            cmd_sample(q_from_flags(sample, s_q, s_r), s_n, s_seed, s_delta, s_stats, s_out);
        } else if (app.got_subcommand(limit)) {
            cmd_limit_shape(l_tau_min, l_tau_max, l_chi_min, l_chi_max, l_step, l_out);
        } else if (app.got_subcommand(kernel)) {
            if (k_type == "sine") {
                cmd_kernel_sine(k_dt, k_dh, k_tau, k_chi, k_tol, k_out);
            } else if (k_type == "finite") {
                if (k_p1.empty()) {
                    throw std::invalid_argument("--p1 is required for --type finite");
                }
                cmd_kernel_finite(q_from_flags(kernel, k_q, k_r), k_p1, k_p2, k_tol, k_out);
            } else {
                throw std::invalid_argument("--type must be \"sine\" or \"finite\"");
            }
        } else if (app.got_subcommand(lln)) {
            cmd_lln(ll_r, ll_n, ll_seed, ll_delta, ll_step, ll_pattern, ll_family, ll_center,
                    ll_radius, ll_amp, ll_threads, ll_out, ll_replicas);
        } else if (app.got_subcommand(oracle)) {
            cmd_oracle(o_max_volume, o_out);
        }
    } catch (const std::logic_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
