#pragma once

#include "nfdm/detection.hpp"
#include "nfdm/modem.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace nfdm {

struct DistanceTable {
    // d[k-1][m][i] = || r_k^{(m)} - r_k^{(i)} || on the true prefix.
    std::vector<std::vector<std::vector<double>>> d;

    int N_b() const { return static_cast<int>(d.size()); }
    int M() const { return d.empty() ? 0 : static_cast<int>(d[0].size()); }
    double at(int k, int m, int i) const {
        return d[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
    }
};

struct Estimates {
    double upper = 0.0;
    double approx = 0.0;
    double lower = 0.0;
};

struct ErrorReport {
    std::size_t n_bursts = 0;
    std::size_t n_symbol_errors = 0;
    std::size_t n_bit_errors = 0;
    double pe_mc = std::numeric_limits<double>::quiet_NaN();
    double pb_mc = std::numeric_limits<double>::quiet_NaN();
    double pe_upper = std::numeric_limits<double>::quiet_NaN();
    double pe_approx = std::numeric_limits<double>::quiet_NaN();
    double pe_lower = std::numeric_limits<double>::quiet_NaN();
    double q_db = std::numeric_limits<double>::quiet_NaN();
    double sigma = 0.0;
};

DistanceTable distance_table(const std::vector<std::vector<CVector>>& candidates);
DistanceTable distance_table(const Burst& seq, const ModemConfig& config);

// Q(x) = erfc(x / sqrt(2)) / 2
double qfunc(double x);

// Pairwise error probability between windows at distance d for complex noise
// with E|n|^2 = sigma^2 per sample: Q(d / (2 sigma_r)), sigma_r = sigma / sqrt(2).
double pairwise_error(double d, double sigma);

// Union bound, independence approximation and nearest-neighbour lower bound
// for step k (1-based) and transmitted index m.
Estimates pk_bounds(const DistanceTable& table, double sigma, int k, int m);

// Average of pk_bounds over all k and m (one sequence).
Estimates sequence_estimates(const DistanceTable& table, double sigma);

struct ConvergenceSettings {
    double rel_tol = 0.01;
    std::size_t window = 5;
    std::size_t max_sequences = 200;
};

struct SemianalyticResult {
    Estimates estimates;
    std::size_t sequences = 0;
    bool converged = false;
    std::vector<Estimates> running;  // running mean after each sequence
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, SemianalyticResult partial)
        : Error(msg), partial_(std::move(partial)) {}
    const SemianalyticResult& partial() const { return partial_; }

private:
    SemianalyticResult partial_;
};

using SequenceSource = std::function<Burst(std::size_t index)>;

// Monte Carlo average of the semianalytic estimates over sequences drawn from
// source, stopped when every running mean varies by less than rel_tol over
// the last `window` sequences.
SemianalyticResult pe_semianalytic(const ModemConfig& config, double sigma, const SequenceSource& source,
                                   const ConvergenceSettings& convergence = {});

struct ErrorCount {
    std::size_t symbol_errors = 0;
    std::size_t bit_errors = 0;
};

ErrorCount count_errors(const std::vector<int>& decided, const Burst& truth, const Constellation& constellation);
ErrorCount count_errors(const DecisionTrace& decided, const Burst& truth, const Constellation& constellation);

// Q^2_dB = 20 log10(sqrt(2) erfcinv(2 pb))
double q_factor_from_pb(double pb);

enum class BitMapping {
    per_symbol_alphabet,  // pb = pe / M
    per_bit,              // pb = pe / log2 M
};

double pb_from_pe(double pe, int M, BitMapping mapping = BitMapping::per_symbol_alphabet);

double rate_efficiency(int N_b, int N_z);
double mean_power_per_symbol(double E_tot, int N_b, double Ts);

// Bit error probability of Gray-mapped square M-QAM at the given EVM.
double pb_from_evm(double evm, int M);
// Q-factor of the EVM-implied bit error probability; +infinity at zero EVM,
// NaN when that probability reaches 1/2.
double q_from_evm(double evm, int M);
// Returns +infinity when rx equals tx.
double evm_q_estimate(const CVector& rx_symbols, const CVector& tx_symbols, int M);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

}  // namespace nfdm
