#include "nfdm/analysis.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <bit>
#include <cmath>

namespace nfdm {

namespace {

// Neumaier compensated sum.
struct Accumulator {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        const double t = sum + x;
        c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

}  // namespace

DistanceTable distance_table(const std::vector<std::vector<CVector>>& candidates) {
    DistanceTable t;
    t.d.resize(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const auto& row = candidates[k];
        const std::size_t M = row.size();
        t.d[k].assign(M, std::vector<double>(M, 0.0));
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = m + 1; i < M; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < row[m].size(); ++j) s += std::norm(row[m][j] - row[i][j]);
                t.d[k][m][i] = t.d[k][i][m] = std::sqrt(s);
            }
    }
    return t;
}

DistanceTable distance_table(const Burst& seq, const ModemConfig& config) {
    return distance_table(true_prefix_candidates(seq, config));
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double pairwise_error(double d, double sigma) {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    return qfunc(d / (std::sqrt(2.0) * sigma));
}

Estimates pk_bounds(const DistanceTable& table, double sigma, int k, int m) {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (k < 1 || k > table.N_b() || m < 0 || m >= table.M()) throw ValidationError("pk_bounds: index out of range");
    Estimates e;
    double log_keep = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < table.M(); ++i) {
        if (i == m) continue;
        const double d = table.at(k, m, i);
        const double p = pairwise_error(d, sigma);
        e.upper += p;
        log_keep += std::log1p(-p);
        dmin = std::min(dmin, d);
    }
    e.lower = table.M() > 1 ? pairwise_error(dmin, sigma) : 0.0;
    e.approx = std::clamp(-std::expm1(log_keep), e.lower, e.upper);
    return e;
}

Estimates sequence_estimates(const DistanceTable& table, double sigma) {
    Accumulator up;
    Accumulator ap;
    Accumulator lo;
    for (int k = 1; k <= table.N_b(); ++k)
        for (int m = 0; m < table.M(); ++m) {
            const auto e = pk_bounds(table, sigma, k, m);
            up.add(e.upper);
            ap.add(e.approx);
            lo.add(e.lower);
        }
    const double n = static_cast<double>(table.N_b()) * table.M();
    return {up.value() / n, ap.value() / n, lo.value() / n};
}

SemianalyticResult pe_semianalytic(const ModemConfig& config, double sigma, const SequenceSource& source,
                                   const ConvergenceSettings& convergence) {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (convergence.window < 1) throw ValidationError("convergence window must be positive");
    SemianalyticResult res;
    Accumulator up;
    Accumulator ap;
    Accumulator lo;
    auto stable = [&](auto member) {
        const std::size_t n = res.running.size();
        const double last = res.running.back().*member;
        for (std::size_t j = n - 1 - convergence.window; j < n - 1; ++j)
            if (std::abs(res.running[j].*member - last) > convergence.rel_tol * std::abs(last)) return false;
        return true;
    };
    for (std::size_t s = 0; s < convergence.max_sequences; ++s) {
        const auto e = sequence_estimates(distance_table(source(s), config), sigma);
        up.add(e.upper);
        ap.add(e.approx);
        lo.add(e.lower);
        const double n = static_cast<double>(s + 1);
        res.running.push_back({up.value() / n, ap.value() / n, lo.value() / n});
        res.estimates = res.running.back();
        res.sequences = s + 1;
        if (res.running.size() > convergence.window && stable(&Estimates::upper) && stable(&Estimates::approx) &&
            stable(&Estimates::lower)) {
            res.converged = true;
            return res;
        }
    }
    throw ConvergenceError("semianalytic estimate did not converge within " +
                               std::to_string(convergence.max_sequences) + " sequences",
                           res);
}

ErrorCount count_errors(const std::vector<int>& decided, const Burst& truth, const Constellation& constellation) {
    if (decided.size() != truth.symbols.size()) throw ValidationError("count_errors: length mismatch");
    ErrorCount c;
    for (std::size_t k = 0; k < decided.size(); ++k) {
        const int t = constellation.index_of(truth.symbols[k]);
        if (t < 0) throw ValidationError("symbol not in constellation");
        if (decided[k] == t) continue;
        ++c.symbol_errors;
        c.bit_errors += static_cast<std::size_t>(std::popcount(constellation.label(decided[k]) ^ constellation.label(t)));
    }
    return c;
}

ErrorCount count_errors(const DecisionTrace& decided, const Burst& truth, const Constellation& constellation) {
    return count_errors(decided.decided, truth, constellation);
}

double q_factor_from_pb(double pb) {
    if (!(pb > 0.0 && pb < 0.5)) throw ValidationError("Q-factor undefined");
    return 20.0 * std::log10(std::sqrt(2.0) * boost::math::erfc_inv(2.0 * pb));
}

double pb_from_pe(double pe, int M, BitMapping mapping) {
    if (M < 2) throw ValidationError("pb_from_pe: M must be at least 2");
    if (mapping == BitMapping::per_symbol_alphabet) return pe / M;
    return pe / std::log2(static_cast<double>(M));
}

double rate_efficiency(int N_b, int N_z) {
    if (N_b < 1 || N_z < 0) throw ValidationError("rate_efficiency: invalid burst shape");
    return static_cast<double>(N_b) / static_cast<double>(N_b + N_z);
}

double mean_power_per_symbol(double E_tot, int N_b, double Ts) {
    if (N_b < 1 || !(Ts > 0.0)) throw ValidationError("mean_power_per_symbol: invalid arguments");
    return E_tot / N_b / Ts;
}

double pb_from_evm(double evm, int M) {
    const double L = std::sqrt(static_cast<double>(M));
    return 4.0 * (1.0 - 1.0 / L) / std::log2(static_cast<double>(M)) * qfunc(std::sqrt(3.0 / ((M - 1) * evm * evm)));
}

double evm_q_estimate(const CVector& rx_symbols, const CVector& tx_symbols, int M) {
    if (rx_symbols.size() != tx_symbols.size() || rx_symbols.empty())
        throw ValidationError("evm_q_estimate: symbol vectors must match and be non-empty");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < rx_symbols.size(); ++i) {
        err += std::norm(rx_symbols[i] - tx_symbols[i]);
        ref += std::norm(tx_symbols[i]);
    }
    if (ref == 0.0) throw ValidationError("evm_q_estimate: zero reference power");
    return q_from_evm(std::sqrt(err / ref), M);
}

double q_from_evm(double evm, int M) {
    if (evm == 0.0) return std::numeric_limits<double>::infinity();
    const double pb = pb_from_evm(evm, M);
    if (pb >= 0.5) return std::numeric_limits<double>::quiet_NaN();
    // Far tail: Q(x) underflows, and the Q-factor tends to 20 log10 x.
    if (pb < 1e-300) return 20.0 * std::log10(std::sqrt(3.0 / ((M - 1) * evm * evm)));
    return q_factor_from_pb(pb);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (successes == 0) ci.lo = 0.0;
    if (successes == trials) ci.hi = 1.0;
    return ci;
}

}  // namespace nfdm
