#pragma once

#include "nfdm/analysis.hpp"
#include "nfdm/channel.hpp"
#include "nfdm/config.hpp"
#include "nfdm/modem.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nfdm {

enum class ChannelKind { awgn, fiber };
enum class DetectorKind { fnft, df_bnft, genie_df, optimum, edc, dbp };

std::string to_string(ChannelKind kind);
std::string to_string(DetectorKind kind);
DetectorKind detector_from_string(const std::string& name);

struct ExperimentConfig {
    // modem
    int M = 16;
    int N_b = 32;
    int N_z = 32;
    int guard_lead = 1;
    double symbol_rate_gbd = 50.0;
    double width_param = 12.5;
    int samples_per_symbol = 8;
    double glme_tolerance = 1e-8;
    // fiber
    double beta2_ps2_per_km = -20.39;
    double gamma_per_w_km = 1.22;
    double alpha_db_per_km = 0.2;
    double length_km = 2000.0;
    double eta_sp = 4.0;
    double carrier_thz = 193.4;
    int ase_polarizations = 1;
    // channel
    ChannelKind channel = ChannelKind::awgn;
    double dz_km = 1.0;
    double dac_bandwidth_ghz = 100.0;
    double adc_bandwidth_ghz = 100.0;
    int dbp_steps_per_span = 100;
    double span_km = 100.0;
    // detector
    std::vector<DetectorKind> detectors{DetectorKind::df_bnft};
    bool phase_comp = false;
    // sweep
    std::vector<double> power_dbm{-10.0};
    // monte carlo
    std::size_t min_bursts = 10;
    std::size_t max_bursts = 1000;
    std::size_t target_errors = 100;
    std::size_t batch = 8;
    std::size_t calibration_bursts = 8;
    // analysis
    bool bounds = false;
    BitMapping pb_mapping = BitMapping::per_symbol_alphabet;
    ConvergenceSettings convergence;
    double count_rel_halfwidth = 0.1;
    // demo-causality
    int demo_symbols = 8;
    int demo_prefix = 6;
    // output
    bool wall_time = true;

    std::uint64_t seed = 1;
    int workers = 1;

    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    static ExperimentConfig load(const std::string& path);
    void validate() const;

    FiberLink link() const;
    Normalization normalization() const;
    double symbol_time_s() const { return 1e-9 / symbol_rate_gbd; }
    ModemConfig modem() const;
    // Normalized noise PSD of the accumulated ASE at the link output.
    double noise_psd_norm() const;
    // Per-sample noise standard deviation, sigma^2 = N0 nu / T_s.
    double noise_sigma() const;
    // Normalized energy per symbol for a power in dBm.
    double energy_per_symbol_norm(double dbm) const;
};

struct ResultRow {
    std::string detector;
    std::string channel_kind;
    int N_b = 0;
    int N_z = 0;
    double eta = 0.0;
    double ps_dbm = 0.0;
    std::size_t n_bursts = 0;
    std::size_t n_symbol_errors = 0;
    std::size_t n_bit_errors = 0;
    double pe = 0.0;
    double pb = 0.0;
    double q_db = 0.0;
    double pe_upper = 0.0;
    double pe_approx = 0.0;
    double pe_lower = 0.0;
    double q_upper_db = 0.0;
    double q_approx_db = 0.0;
    double q_lower_db = 0.0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    double q_evm_db = 0.0;
};

struct BoundsRow {
    ResultRow row;
    std::size_t semianalytic_sequences = 0;
    bool semianalytic_converged = false;
    std::size_t counting_bursts = 0;
    bool counting_converged = false;
};

// Gain placing the mean energy per symbol at the given power.
double calibrated_gain(const ExperimentConfig& cfg, double dbm);

// Semianalytic estimates at power_dbm[power_index]; throws ConvergenceError.
SemianalyticResult semianalytic_for_power(const ExperimentConfig& cfg, std::size_t power_index);

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);
std::vector<BoundsRow> run_bounds(const ExperimentConfig& cfg);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const ResultRow& row);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows);

struct CausalityDemo {
    std::vector<double> t;  // normalized time
    CVector full;
    CVector prefix;
    double t_k = 0.0;
    double deviation_before = 0.0;
    double deviation_after = 0.0;
};

// Noiseless r(t) for two bursts sharing the first k symbols and their relative
// L2 deviation before and after t_k.
CausalityDemo causality_demo(const Burst& full, const Burst& prefix, int k, const ModemConfig& config);
CausalityDemo demo_causality(const ExperimentConfig& cfg);
void write_demo_csv(std::ostream& os, const CausalityDemo& demo, const Normalization& norm);

}  // namespace nfdm
