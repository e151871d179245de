#include "nfdm/selftest.hpp"

#include "nfdm/analysis.hpp"
#include "nfdm/channel.hpp"
#include "nfdm/detection.hpp"
#include "nfdm/modem.hpp"
#include "nfdm/rng.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace nfdm {

namespace {

struct Check {
    std::string name;
    std::function<std::string()> run;  // empty string on success
};

std::string expect_below(double value, double limit) {
    if (value <= limit) return {};
    std::ostringstream os;
    os << value << " exceeds " << limit;
    return os.str();
}

ModemConfig small_modem(double gain) {
    ModemConfig m;
    m.constellation = Constellation::qam(16);
    m.N_b = 8;
    m.N_z = 24;
    m.gain = gain;
    return m;
}

Burst burst_for(const ModemConfig& m, std::uint64_t seed) {
    auto rng = make_stream(seed, 0, StreamTag::symbols);
    std::uniform_int_distribution<int> pick(0, m.constellation.size() - 1);
    std::vector<int> idx(static_cast<std::size_t>(m.N_b));
    for (auto& i : idx) i = pick(rng);
    return Burst::from_indices(m.constellation, idx, m.N_z);
}

ComplexEnvelope gaussian(std::size_t n, double dt) {
    ComplexEnvelope s(TimeGrid{-0.5 * dt * static_cast<double>(n), dt, n}, UnitMode::normalized);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s.time(i);
        s.samples[i] = std::exp(-t * t) * std::polar(1.0, 0.3 * t);
    }
    return s;
}

SuiteResult run_suite(const std::string& name, const std::vector<Check>& checks) {
    SuiteResult suite;
    suite.suite = name;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& c : checks) {
        InvariantResult r;
        r.name = name + "." + c.name;
        try {
            r.detail = c.run();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        suite.invariants.push_back(r);
    }
    suite.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return suite;
}

}  // namespace

Fault fault_from_string(const std::string& name) {
    if (name == "none") return Fault::none;
    if (name == "glme-tolerance") return Fault::glme_tolerance;
    throw ValidationError("unknown fault '" + name + "'");
}

bool SuiteResult::passed() const {
    for (const auto& i : invariants)
        if (!i.passed) return false;
    return true;
}

std::vector<SuiteResult> run_selftest(Fault fault) {
    const double glme_tol = fault == Fault::glme_tolerance ? 0.0 : 1e-8;
    auto modem = [&](double gain) {
        auto m = small_modem(gain);
        m.glme.tolerance = glme_tol;
        return m;
    };
    std::vector<SuiteResult> out;

    out.push_back(run_suite("core-signal", {
        {"ft_round_trip", [] {
             const auto s = gaussian(256, 0.05);
             return expect_below(relative_l2(inverse_ft(forward_ft(s)).samples, s.samples), 1e-12);
         }},
        {"parseval", [] {
             const auto s = gaussian(256, 0.05);
             const double e = signal_energy(s);
             return expect_below(std::abs(e - spectrum_energy(forward_ft(s))) / e, 1e-10);
         }},
        {"time_reverse_involution", [] {
             const auto s = gaussian(64, 0.1);
             const auto r = time_reverse(time_reverse(s));
             return expect_below(relative_l2(r.samples, s.samples) + std::abs(r.t0 - s.t0), 0.0);
         }},
    }));

    out.push_back(run_suite("nft", {
        {"glme_residual_within_tolerance", [&] {
             const auto m = modem(0.3);
             const auto rho = burst_spectrum(burst_for(m, 1), m);
             const auto res = backward_nft_detailed(rho, m.grid(), m.glme);
             return expect_below(res.solve.residual, m.glme.tolerance);
         }},
        {"round_trip", [&] {
             const auto m = modem(0.1);
             const auto rho = burst_spectrum(burst_for(m, 2), m);
             const auto g = m.grid();
             const auto q = backward_nft(rho, TimeGrid{-g.back(), g.dt, g.size}, m.glme);
             const auto back = forward_nft(q, m.lambda_grid(), m.sigma);
             return expect_below(relative_l2(back.rho, rho.rho), 1e-3);
         }},
        {"energy_identity", [&] {
             const auto m = modem(0.3);
             const auto rho = burst_spectrum(burst_for(m, 3), m);
             const auto q = transmit(burst_for(m, 3), m);
             const double e = nonlinear_energy(rho);
             return expect_below(std::abs(signal_energy(q) - e) / e, 5e-3);
         }},
    }));

    out.push_back(run_suite("nis-modem", {
        {"causality", [&] {
             const auto m = modem(0.3);
             const auto a = burst_for(m, 4);
             auto b = burst_for(m, 5);
             const int k = 5;
             for (int i = 0; i < k; ++i) b.symbols[static_cast<std::size_t>(i)] = a.symbols[static_cast<std::size_t>(i)];
             const auto ra = transmit(a, m);
             const auto rb = transmit(b, m);
             const std::size_t end = m.window_start(k + 1);
             CVector xa(ra.samples.begin(), ra.samples.begin() + static_cast<std::ptrdiff_t>(end));
             CVector xb(rb.samples.begin(), rb.samples.begin() + static_cast<std::ptrdiff_t>(end));
             return expect_below(relative_l2(xb, xa), 1e-4);
         }},
        {"precompensation_preserves_energy", [&] {
             auto m = modem(0.1);
             const auto b = burst_for(m, 6);
             const double e0 = signal_energy(transmit(b, m));
             m.precomp_length = 0.5;
             return expect_below(std::abs(signal_energy(transmit(b, m)) - e0) / e0, 1e-3);
         }},
    }));

    out.push_back(run_suite("channel", {
        {"edc_inverts_dispersion", [] {
             auto l = FiberLink::from_engineering(-20.39, 0.0, 0.2, 50.0);
             ComplexEnvelope s(TimeGrid{-256 * 1e-12, 2e-12, 256}, UnitMode::physical);
             for (std::size_t i = 0; i < s.size(); ++i) {
                 const double t = s.time(i) / 10e-12;
                 s.samples[i] = 1e-2 * std::exp(-t * t);
             }
             Rng rng(1);
             const auto out = ssfm_propagate(s, l, 5e3, NoiseKind::none, rng);
             return expect_below(relative_l2(edc(out, l).samples, s.samples), 1e-9);
         }},
        {"dbp_inverts_propagation", [] {
             const auto l = FiberLink::from_engineering(-20.39, 1.22, 0.2, 200.0);
             ComplexEnvelope s(TimeGrid{-512 * 1.25e-12, 1.25e-12, 1024}, UnitMode::physical);
             for (std::size_t i = 0; i < s.size(); ++i) {
                 const double t = s.time(i) / 20e-12;
                 s.samples[i] = std::sqrt(1e-3) * std::exp(-t * t);
             }
             Rng rng(1);
             const auto out = ssfm_propagate(s, l, 100.0, NoiseKind::none, rng);
             return expect_below(relative_l2(dbp(out, l, 100, 100e3).samples, s.samples), 1e-4);
         }},
    }));

    out.push_back(run_suite("detection", {
        {"noiseless_df_bnft_recovers_burst", [&] {
             const auto m = modem(0.3);
             const auto b = burst_for(m, 7);
             const auto trace = df_bnft_detect(noiseless_windows(b, m), m);
             const auto errors = count_errors(trace, b, m.constellation);
             return errors.symbol_errors == 0 ? std::string{} : "symbol errors in noiseless detection";
         }},
        {"noiseless_fnft_recovers_burst", [&] {
             const auto m = modem(0.1);
             const auto b = burst_for(m, 8);
             const auto errors = count_errors(fnft_detect(transmit(b, m), m), b, m.constellation);
             return errors.symbol_errors == 0 ? std::string{} : "symbol errors in noiseless detection";
         }},
    }));

    out.push_back(run_suite("analysis", {
        {"bound_sandwich", [&] {
             const auto m = modem(0.1);
             const auto table = distance_table(burst_for(m, 9), m);
             for (double sigma : {0.01, 0.1, 1.0})
                 for (int k = 1; k <= table.N_b(); ++k)
                     for (int i = 0; i < table.M(); ++i) {
                         const auto e = pk_bounds(table, sigma, k, i);
                         if (!(e.lower <= e.approx && e.approx <= e.upper)) return std::string("bounds out of order");
                     }
             return std::string{};
         }},
        {"q_factor_reference", [] { return expect_below(std::abs(q_factor_from_pb(1e-3) - 9.7998), 1e-3); }},
        {"rate_efficiency_reference", [] { return expect_below(std::abs(rate_efficiency(2048, 2000) - 0.50593), 1e-4); }},
    }));
    return out;
}

}  // namespace nfdm
