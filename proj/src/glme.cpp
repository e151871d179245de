#include "nfdm/nft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace nfdm {
namespace {

constexpr double kConditionFloor = 1e-10;

using Mat4 = Eigen::Matrix<cd, 4, 4>;
using Vec4 = Eigen::Matrix<cd, 4, 1>;

// Hankel kernel entries of the size-n system: H[r][s] = hist[n-1-r-s].
cd hankel(const CVector& hist, std::size_t n, std::size_t idx) {
    return idx <= n - 1 ? hist[n - 1 - idx] : cd{};
}

double trapezoid_weight(std::size_t i, std::size_t n, double h) {
    if (n == 1) return 0.0;
    return (i == 0 || i == n - 1) ? 0.5 * h : h;
}

// Relative residual of K(I + sigma W H W conj(H)) = sigma conj(H[0,:]).
double hankel_residual(const CVector& hist, std::span<const cd> k, double h, int sigma) {
    const std::size_t n = k.size();
    CVector a(n, cd{});
    for (std::size_t r = 0; r < n; ++r) {
        const cd kr = k[r] * trapezoid_weight(r, n, h);
        if (kr == cd{}) continue;
        for (std::size_t s = 0; r + s < n; ++s) a[s] += kr * hankel(hist, n, r + s);
    }
    double res = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cd c{};
        for (std::size_t s = 0; s + j < n; ++s) c += a[s] * trapezoid_weight(s, n, h) * std::conj(hankel(hist, n, s + j));
        const cd b = static_cast<double>(sigma) * std::conj(hankel(hist, n, j));
        res = std::max(res, std::abs(k[j] + static_cast<double>(sigma) * c - b));
        scale = std::max(scale, std::abs(b));
    }
    return scale > 0.0 ? res / scale : res;
}

}  // namespace

GlmeRecursion::GlmeRecursion(double h, int sigma) : h_(h), sigma_(sigma) {
    if (!(h > 0.0)) throw ValidationError("GlmeRecursion: step must be positive");
    if (sigma != 1 && sigma != -1) throw ValidationError("sigma must be +1 or -1");
}

cd GlmeRecursion::push(cd f) {
    const double s = static_cast<double>(sigma_);
    hist_.push_back(f);
    const std::size_t n = hist_.size();
    if (n == 1) {
        const double den = 1.0 + s * h_ * h_ * std::norm(f);
        if (std::abs(den) < kConditionFloor) throw Error("GLME system ill-conditioned");
        pu_.assign(1, 1.0 / den);
        pv_.assign(1, h_ * f / den);
        return s * std::conj(f);
    }
    const std::size_t m = n - 1;  // size before this step
    cd beta{};
    for (std::size_t r = 0; r < m; ++r) beta += hist_[m - r] * pu_[r];
    beta *= -h_;
    const double den = 1.0 + s * std::norm(beta);
    if (std::abs(den) < kConditionFloor) throw Error("GLME system ill-conditioned");
    const double a = 1.0 / den;
    const cd sb = s * beta;
    CVector nu(n);
    CVector nv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cd pu = i < m ? pu_[i] : cd{};
        const cd pv = i < m ? pv_[i] : cd{};
        // mirror solution shifted by one: q_u[i-1] = conj(pv[m-i]), q_v[i-1] = -sigma conj(pu[m-i])
        const cd qu = i > 0 ? std::conj(pv_[m - i]) : cd{};
        const cd qv = i > 0 ? -s * std::conj(pu_[m - i]) : cd{};
        nu[i] = a * (pu + sb * qu);
        nv[i] = a * (pv + sb * qv);
    }
    pu_.swap(nu);
    pv_.swap(nv);
    return corrected_diagonal();
}

namespace {

struct Correction {
    Mat4 Y;
    Vec4 z0;
    Vec4 coeff;
};

Correction trapezoid_correction(const CVector& pu, const CVector& pv, cd om0, double h, int sigma) {
    const double s = static_cast<double>(sigma);
    const std::size_t n = pu.size();
    Vec4 P;
    P << pu[0], pu[n - 1], pv[0], pv[n - 1];
    Vec4 Q;
    Q << std::conj(pv[n - 1]), std::conj(pv[0]), -s * std::conj(pu[n - 1]), -s * std::conj(pu[0]);
    Vec4 Eu0 = Vec4::Zero();
    Eu0(0) = 1.0;
    Vec4 Evn = Vec4::Zero();
    Evn(3) = 1.0;
    Correction c;
    c.Y.col(0) = -s * (h / 2.0) * std::conj(om0) * P;
    c.Y.col(1) = -0.5 * (Evn + s * Q);
    c.Y.col(2) = 0.5 * (P - Eu0);
    c.Y.col(3) = (h / 2.0) * om0 * (-s * Q);
    c.z0 = (Evn + s * Q) / h;
    const std::array<int, 4> sel{2, 3, 0, 1};
    Mat4 G = Mat4::Identity();
    Vec4 rhs;
    for (int r = 0; r < 4; ++r) {
        G.row(r) += c.Y.row(sel[r]);
        rhs(r) = c.z0(sel[r]);
    }
    Eigen::PartialPivLU<Mat4> lu(G);
    if (std::abs(lu.determinant()) < kConditionFloor) throw Error("GLME system ill-conditioned");
    c.coeff = lu.solve(rhs);
    return c;
}

}  // namespace

cd GlmeRecursion::corrected_diagonal() const {
    const auto c = trapezoid_correction(pu_, pv_, hist_[0], h_, sigma_);
    return (c.z0 - c.Y * c.coeff)(0);
}

GlmeRecursion::Solution GlmeRecursion::full_solution() const {
    const std::size_t n = hist_.size();
    Solution sol;
    if (n == 0) return sol;
    const double s = static_cast<double>(sigma_);
    if (n == 1) {
        sol.u = {s * std::conj(hist_[0])};
        sol.v = {cd{}};
        return sol;
    }
    const auto c = trapezoid_correction(pu_, pv_, hist_[0], h_, sigma_);
    const cd om0 = hist_[0];
    sol.u.resize(n);
    sol.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cd pu = pu_[i];
        const cd pv = pv_[i];
        const cd qu = std::conj(pv_[n - 1 - i]);
        const cd qv = -s * std::conj(pu_[n - 1 - i]);
        const double eu0 = i == 0 ? 1.0 : 0.0;
        const double evn = i == n - 1 ? 1.0 : 0.0;
        const cd zu = s * qu / h_;
        const cd zv = (evn + s * qv) / h_;
        const cd yu = c.coeff(0) * (-s * (h_ / 2.0) * std::conj(om0) * pu) + c.coeff(1) * (-0.5 * s * qu) +
                      c.coeff(2) * (0.5 * (pu - eu0)) + c.coeff(3) * ((h_ / 2.0) * om0 * (-s * qu));
        const cd yv = c.coeff(0) * (-s * (h_ / 2.0) * std::conj(om0) * pv) + c.coeff(1) * (-0.5 * (evn + s * qv)) +
                      c.coeff(2) * (0.5 * pv) + c.coeff(3) * ((h_ / 2.0) * om0 * (-s * qv));
        sol.u[i] = zu - yu;
        sol.v[i] = zv - yv;
    }
    return sol;
}

double GlmeRecursion::residual() const {
    if (hist_.empty()) return 0.0;
    const auto sol = full_solution();
    return hankel_residual(hist_, sol.u, h_, sigma_);
}

namespace {

GlmeSolve solve_dense(std::span<const cd> f, double h, int sigma) {
    const std::size_t N = f.size();
    const double s = static_cast<double>(sigma);
    GlmeSolve out;
    out.K_diag.resize(N);
    // hist in push order (descending x) so the residual helper can be shared.
    CVector hist(f.rbegin(), f.rend());
    for (std::size_t m = 0; m < N; ++m) {
        const std::size_t n = N - m;
        CVector sub(hist.begin(), hist.begin() + static_cast<std::ptrdiff_t>(n));
        Eigen::MatrixXcd H(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) H(r, c) = hankel(sub, n, r + c);
        Eigen::VectorXd w(n);
        for (std::size_t i = 0; i < n; ++i) w(i) = trapezoid_weight(i, n, h);
        const Eigen::MatrixXcd G = H * w.asDiagonal() * H.conjugate();
        const Eigen::MatrixXcd A =
            Eigen::MatrixXcd::Identity(n, n) + s * (w.asDiagonal() * G).transpose();
        const Eigen::VectorXcd b = s * H.row(0).conjugate().transpose();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
        if (std::abs(lu.determinant()) < kConditionFloor) throw Error("GLME system ill-conditioned");
        const Eigen::VectorXcd k = lu.solve(b);
        out.K_diag[m] = k(0);
        CVector kv(k.data(), k.data() + n);
        out.residual = std::max(out.residual, hankel_residual(sub, kv, h, sigma));
    }
    return out;
}

}  // namespace

GlmeSolve solve_glme(std::span<const cd> f, double h, int sigma, const BackwardNftOptions& opts) {
    if (f.empty()) throw ValidationError("solve_glme: empty kernel");
    GlmeSolve out;
    if (opts.method == GlmeMethod::dense) {
        out = solve_dense(f, h, sigma);
    } else {
        const std::size_t N = f.size();
        out.K_diag.resize(N);
        GlmeRecursion rec(h, sigma);
        std::vector<std::size_t> probes;
        for (std::size_t p = 1; p <= opts.residual_probes; ++p) probes.push_back(std::max<std::size_t>(1, p * N / opts.residual_probes));
        std::size_t next_probe = 0;
        for (std::size_t j = 0; j < N; ++j) {
            const std::size_t m = N - 1 - j;
            out.K_diag[m] = rec.push(f[m]);
            if (!std::isfinite(out.K_diag[m].real()) || !std::isfinite(out.K_diag[m].imag()))
                throw Error("GLME system ill-conditioned");
            while (next_probe < probes.size() && probes[next_probe] == j + 1) {
                out.residual = std::max(out.residual, rec.residual());
                ++next_probe;
            }
        }
    }
    if (!(out.residual <= opts.tolerance)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "GLME residual %.3e exceeds tolerance %.3e", out.residual, opts.tolerance);
        throw Error(buf);
    }
    return out;
}

}  // namespace nfdm
