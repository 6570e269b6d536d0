#include "fdx/budget.hpp"
#include "fdx/measure.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr const char* kUsage =
    "usage: fdxsim --experiment <sync|sic|required-lq|throughput|budget|selftest>\n"
    "              [--config <path>] [--seed <int>] [--out <dir>] [--set key=value]...\n"
    "\n"
    "Runs one experiment of the full-duplex MIMO link simulator. Data and\n"
    "summary CSVs are written under the output directory; only the summary\n"
    "table goes to stdout. Missing --config falls back to the embedded\n"
    "defaults. FDX_THREADS caps trial parallelism (0 = auto).\n";

struct RunSpec {
    std::string config_path;
    std::string experiment;
    uint64_t master_seed = 1;
    std::string out_dir = ".";
    std::vector<std::pair<std::string, std::string>> overrides;
};

int usage_error(const std::string& msg) {
    std::cerr << "fdxsim: " << msg << "\n" << kUsage;
    return 2;
}

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

int run_selftest(const fdx::SystemParams& base) {
    using namespace fdx;
    int pass = 0, fail = 0;
    auto check = [&](bool ok, const char* name) {
        std::cout << (ok ? "  [ok]   " : "  [FAIL] ") << name << "\n";
        (ok ? pass : fail)++;
    };

    SystemParams p = base;
    p.slots_per_frame = 2;
    p.delay_desired_max = 32;
    p.validate();

    // QPSK round trip
    {
        Rng rng = make_rng(7);
        BitVec bits = random_bits(400, rng);
        check(qpsk_demodulate(qpsk_modulate(bits)) == bits, "qpsk round trip");
    }
    // ZC unit modulus and k = -1 anchor
    {
        ZcSequence zc = zc_generate(p.root_index_1);
        bool ok = std::abs(zc.value(-1) - cplx(1.0, 0.0)) < 1e-12;
        for (int k = -31; k <= 31 && ok; ++k)
            if (k != 0) ok = std::abs(std::abs(zc.value(k)) - 1.0) < 1e-12;
        check(ok, "zadoff-chu sequence");
    }
    // OFDM transform round trip
    {
        Rng rng = make_rng(9);
        auto layout = FrameLayout(p, DuplexMode::FdMimo);
        std::vector<BitVec> pay(2);
        for (auto& b : pay) b = random_bits(layout.data_capacity_bits_per_port(), rng);
        ResourceGrid g = build_frame(p, DuplexMode::FdMimo, NodeRole::A, pay);
        auto streams = ofdm_modulate(g, p);
        RxLattice back = ofdm_demodulate(streams, 0, p, *g.layout);
        double err = 0.0, ref = 0.0;
        for (int port = 0; port < 2; ++port) {
            err += (back[port] - g.values[port]).squaredNorm();
            ref += g.values[port].squaredNorm();
        }
        check(err / ref < 1e-20, "ofdm transform round trip");
    }
    // Table I case coverage
    {
        NspReport rep;
        rep.peak_idx_1 = 100;
        rep.peak_idx_2 = 50;
        rep.nsp_1 = 5;
        rep.nsp_2 = 5;
        bool ok = nsp_switch(rep, 2.0).case_taken == SyncCase::BothPass;
        rep.nsp_2 = 1;
        ok = ok && nsp_switch(rep, 2.0).case_taken == SyncCase::DesiredOnly;
        rep.nsp_1 = 1;
        ok = ok && nsp_switch(rep, 2.0).case_taken == SyncCase::Fail;
        rep.nsp_2 = 5;
        ok = ok && nsp_switch(rep, 2.0).case_taken == SyncCase::SelfOnly;
        check(ok, "nsp switching cases");
    }
    // Residual analog power arithmetic
    {
        auto r = budget::residual_analog_power(23.0, -43.0, -58.0);
        check(std::abs(r.alpha_total_db - (-45.93)) < 0.05, "analog residual arithmetic");
    }
    // Perfect-CSI cancellation on one trial
    {
        TrialContext ctx = make_trial_context(p, DuplexMode::FdMimo, 7.0);
        ctx.params.nonlinear_enabled = false;
        TrialOptions opt;
        opt.genie_timing = true;
        TrialResult r = run_link_trial(ctx, 20.0, 42, opt);
        check(r.delta_frame_db && *r.delta_frame_db < -35.0, "digital cancellation smoke");
        check(r.ber && *r.ber < 0.01, "detection smoke");
    }
    std::cout << "selftest: " << pass << " passed, " << fail << " failed\n";
    return fail == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunSpec spec;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) return nullptr;
            return argv[++i];
        };
        if (arg == "--help" || arg == "-h") {
            std::cout << kUsage;
            return 0;
        } else if (arg == "--config") {
            const char* v = next();
            if (!v) return usage_error("--config needs a path");
            spec.config_path = v;
        } else if (arg == "--experiment") {
            const char* v = next();
            if (!v) return usage_error("--experiment needs a name");
            spec.experiment = v;
        } else if (arg == "--seed") {
            const char* v = next();
            if (!v) return usage_error("--seed needs an integer");
            spec.master_seed = std::strtoull(v, nullptr, 10);
        } else if (arg == "--out") {
            const char* v = next();
            if (!v) return usage_error("--out needs a directory");
            spec.out_dir = v;
        } else if (arg == "--set") {
            const char* v = next();
            if (!v) return usage_error("--set needs key=value");
            std::string kv = v;
            size_t eq = kv.find('=');
            if (eq == std::string::npos) return usage_error("--set needs key=value");
            spec.overrides.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
        } else {
            return usage_error("unknown flag '" + arg + "'");
        }
    }
    if (spec.experiment.empty()) return usage_error("missing --experiment");

    static const char* kExperiments[] = {"sync", "sic", "required-lq", "throughput", "budget", "selftest"};
    bool known = false;
    for (const char* e : kExperiments) known = known || spec.experiment == e;
    if (!known) return usage_error("unknown experiment '" + spec.experiment + "'");

    fdx::SystemParams params;
    fdx::ExperimentConfig cfg;
    try {
        if (!spec.config_path.empty()) params = fdx::load_params(spec.config_path);
        for (const auto& [k, v] : spec.overrides) {
            bool handled = false;
            try {
                handled = params.apply(k, v) || cfg.apply(k, v);
            } catch (const std::exception& e) {
                return usage_error("bad value for '" + k + "': " + e.what());
            }
            if (!handled) return usage_error("unknown setting '" + k + "'");
        }
        params.validate();
    } catch (const std::exception& e) {
        std::cerr << "fdxsim: " << e.what() << "\n";
        return spec.config_path.empty() ? 2 : 3;
    }

    if (spec.experiment == "budget") {
        fdx::print_budget_report(std::cout, params, fdx::make_budget_report(params));
        return 0;
    }
    if (spec.experiment == "selftest") {
        try {
            return run_selftest(params);
        } catch (const std::exception& e) {
            std::cerr << "fdxsim: selftest failed: " << e.what() << "\n";
            return 1;
        }
    }

    fdx::ExperimentOutput out;
    try {
        if (spec.experiment == "sync") {
            out = fdx::run_sync_experiment(params, cfg, spec.master_seed);
        } else if (spec.experiment == "sic") {
            out = fdx::run_sic_experiment(params, cfg, spec.master_seed);
        } else if (spec.experiment == "required-lq") {
            out = fdx::run_required_lq_experiment(params, cfg, spec.master_seed);
        } else if (spec.experiment == "throughput") {
            out = fdx::run_throughput_experiment(params, cfg, spec.master_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "fdxsim: experiment failed: " << e.what() << "\n";
        return 1;
    }

    try {
        std::filesystem::create_directories(spec.out_dir);
        std::string stem = spec.out_dir + "/" + spec.experiment + "_" + timestamp();
        std::ofstream data(stem + ".csv", std::ios::binary);
        std::ofstream sum(stem + "_summary.csv", std::ios::binary);
        if (!data || !sum) throw std::runtime_error("cannot open output files under " + spec.out_dir);
        data << out.data_csv;
        sum << out.summary_csv;
        if (!data.flush() || !sum.flush()) throw std::runtime_error("write failed");
        std::cout << "# " << stem << ".csv\n";
    } catch (const std::exception& e) {
        std::cerr << "fdxsim: " << e.what() << "\n";
        return 3;
    }
    for (const auto& line : out.summary) std::cout << line << "\n";
    return 0;
}
