#pragma once

#include "nfdm/modem.hpp"
#include "nfdm/signal.hpp"

#include <optional>
#include <vector>

namespace nfdm {

struct ReceivedWindows {
    std::vector<CVector> windows;  // N_b windows of nu samples on [t_{k-1}, t_k)
    CVector discarded_tail;        // samples at t >= t_{N_b}

    int N_b() const { return static_cast<int>(windows.size()); }
};

struct DecisionTrace {
    std::vector<int> decided;                         // constellation indices
    std::vector<std::vector<double>> per_step_distances;  // N_b x M
    std::optional<double> phase_offset;

    Burst to_burst(const Constellation& c, int N_z) const { return Burst::from_indices(c, decided, N_z); }
};

// Ideal low-pass at nu/(2 T_s), sampling at nu/T_s and windowing. The first
// window starts at t = -T_s/2.
ReceivedWindows adc_front_end(const ComplexEnvelope& sig, int nu, double Ts, int N_b);

DecisionTrace df_bnft_detect(const ReceivedWindows& rx, const ModemConfig& config);
DecisionTrace genie_df_detect(const ReceivedWindows& rx, const ModemConfig& config, const Burst& truth);

// Noiseless candidate windows r_k^{(i)} built on the true prefix of a burst:
// result[k-1][i] for k = 1..N_b and every constellation index i.
std::vector<std::vector<CVector>> true_prefix_candidates(const Burst& truth, const ModemConfig& config);

// Genie decisions from precomputed true-prefix candidates.
DecisionTrace genie_df_detect(const ReceivedWindows& rx, const std::vector<std::vector<CVector>>& candidates);

// Matched-filter symbol estimates of s(t), scaled back to the constellation.
CVector matched_filter(const ComplexEnvelope& s_hat, const ModemConfig& config);

// Matched filtering of an estimate of s(t) and per-symbol minimum-distance
// decisions.
DecisionTrace linear_detect(const ComplexEnvelope& s_hat, const ModemConfig& config);

// Minimum-distance decisions on symbol estimates.
DecisionTrace decide(const CVector& estimates, const Constellation& constellation);

// Symbol estimates from the forward NFT of the received signal, which must lie
// on the modem grid; noise is allowed at the edges.
CVector fnft_symbol_estimates(const ComplexEnvelope& sig, const ModemConfig& config);
DecisionTrace fnft_detect(const ComplexEnvelope& sig, const ModemConfig& config);

// Data-aided phase estimate against reference windows, scanned on a 1 mrad grid.
std::pair<ReceivedWindows, double> phase_offset_compensate(const ReceivedWindows& rx, const ReceivedWindows& reference);

// Exhaustive maximum-likelihood sequence search (M^{N_b} <= 1e5).
Burst optimum_sequence_detect(const ReceivedWindows& rx, const ModemConfig& config);

// Noiseless windows of the transmitted burst (no precompensation).
ReceivedWindows noiseless_windows(const Burst& burst, const ModemConfig& config);

}  // namespace nfdm
