// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: unknown-interference modeling and outage-constrained rate
// adaptation for the uplink of cell-free massive MIMO networks.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFMIMO_RECEIVER_HPP
#define CFMIMO_RECEIVER_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/core/error.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/core/summation.hpp"
#include "cfmimo/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace cfmimo::receiver {

using channel::ChannelStatistics;

inline CVec mr_combiner(const CVec &hhat)
{
    const double n2 = hhat.squaredNorm();
    if (!(n2 >= 1e-300))
        throw NumericalError("mr_combiner: degenerate channel estimate");
    return hhat / n2;
}

/// v = (sum_i p_i hhat_i hhat_i^H + sigma2 I)^-1 p_k hhat_k over the known UEs
/// whose estimates are the columns of `hhat`.
inline CVec rzf_combiner(const CMat &hhat, std::span<const double> power, double sigma2, std::size_t k)
{
    if (!(sigma2 > 0.0))
        throw ConfigError("rzf_combiner: noise power must be positive");
    if (static_cast<std::size_t>(hhat.cols()) != power.size() || k >= power.size())
        throw ConfigError("rzf_combiner: inconsistent inputs");
    const Eigen::Index n = hhat.rows();
    CMat scaled = hhat;
    for (Eigen::Index i = 0; i < scaled.cols(); ++i)
        scaled.col(i) *= std::sqrt(power[static_cast<std::size_t>(i)]);
    CMat A = CMat::Identity(n, n) * sigma2;
    A.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    const Eigen::LLT<CMat, Eigen::Lower> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericalError("rzf_combiner: regularized Gram matrix is not positive definite");
    return llt.solve(power[k] * hhat.col(static_cast<Eigen::Index>(k)));
}

inline CVec rzf_combiner(std::span<const CVec> hhat, std::span<const double> power, double sigma2, std::size_t k)
{
    if (hhat.empty())
        throw ConfigError("rzf_combiner: no estimates");
    CMat H(hhat.front().size(), static_cast<Eigen::Index>(hhat.size()));
    for (std::size_t i = 0; i < hhat.size(); ++i)
        H.col(static_cast<Eigen::Index>(i)) = hhat[i];
    return rzf_combiner(H, power, sigma2, k);
}

/// Expectations over fading of the combined channels g_ki (one entry per
/// serving AP, g_ki,l = sqrt(p_i) v_kl^H h_il) for the desired UE k.
struct CombinedChannelStats {
    CVec mean_g_kk;
    std::vector<CMat> second_moments; ///< E{g_ki g_ki^H} for every known UE i
    RVec noise_diag;                  ///< sigma2 E{||v_kl||^2}
    std::size_t n_mc = 0;

    std::size_t num_aps() const { return static_cast<std::size_t>(mean_g_kk.size()); }

    CMat known_sum() const
    {
        const auto n = static_cast<Eigen::Index>(num_aps());
        CMat s = CMat::Zero(n, n);
        for (const CMat &m : second_moments)
            s += m;
        return s;
    }

    CMat noise_matrix() const { return noise_diag.cast<cplx>().asDiagonal(); }
};

struct DropStatistics {
    CombinedChannelStats known;
    CMat unknown_cov; ///< sum over unknown UEs of E{g_ki g_ki^H}

    RVec unknown_power() const { return unknown_cov.diagonal().real(); }
};

/// max_{l != m} |U_lm| / min_l U_ll. Zero for a single AP or an all-zero matrix.
inline double diagonality_ratio(const CMat &U)
{
    const Eigen::Index n = U.rows();
    double off = 0.0;
    for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index m = 0; m < n; ++m)
            if (l != m)
                off = std::max(off, std::abs(U(l, m)));
    if (off == 0.0)
        return 0.0;
    const double diag = U.diagonal().real().minCoeff();
    return diag > 0.0 ? off / diag : std::numeric_limits<double>::infinity();
}

/// Largest |U_lm| / sqrt(U_ll U_mm), l != m. Unlike diagonality_ratio it does
/// not grow when the per-AP interference levels differ.
inline double cross_coherence(const CMat &U)
{
    double out = 0.0;
    for (Eigen::Index l = 0; l < U.rows(); ++l)
        for (Eigen::Index m = 0; m < U.cols(); ++m) {
            const double scale = std::sqrt(U(l, l).real() * U(m, m).real());
            if (l != m && scale > 0.0)
                out = std::max(out, std::abs(U(l, m)) / scale);
        }
    return out;
}

enum class EstimationMode { mmse, perfect };

/// `full` samples every channel, pilot signal and noise vector per block.
/// `conditional` samples only the pilot observations and uses the exact
/// Gaussian conditional mean and covariance of each channel given them, which
/// has the same expectation with much lower variance.
enum class SamplingMode { conditional, full };

struct MonteCarloConfig {
    CombinerKind combiner = CombinerKind::rzf;
    std::size_t n_mc = 1000;
    SamplingMode sampling = SamplingMode::conditional;
    EstimationMode estimation = EstimationMode::mmse;
    std::size_t desired = 0;

    void validate(const ChannelStatistics &s) const
    {
        if (n_mc < 1)
            throw ConfigError("Monte Carlo: n_mc must be positive");
        if (desired >= s.num_known)
            throw ConfigError("Monte Carlo: desired UE must be a known UE");
        if (estimation == EstimationMode::perfect && sampling == SamplingMode::conditional)
            throw ConfigError("Monte Carlo: perfect estimation requires full sampling");
    }
};

namespace detail {

class Accumulator {
public:
    Accumulator(std::size_t num_aps, std::size_t num_known)
        : n_(static_cast<Eigen::Index>(num_aps)), g_kk_(CVec::Zero(n_)), noise_(RVec::Zero(n_)),
          unknown_(CMat::Zero(n_, n_))
    {
        second_.assign(num_known, CompensatedSum<CMat>(CMat::Zero(n_, n_)));
    }

    void add(const CVec &g_kk, const std::vector<CMat> &second, const RVec &noise, const CMat &unknown)
    {
        g_kk_.add(g_kk);
        for (std::size_t i = 0; i < second.size(); ++i)
            second_[i].add(second[i]);
        noise_.add(noise);
        unknown_.add(unknown);
        ++blocks_;
    }

    DropStatistics finish() const
    {
        const double inv = 1.0 / static_cast<double>(blocks_);
        DropStatistics d;
        d.known.mean_g_kk = g_kk_.value() * inv;
        for (const auto &s : second_) {
            CMat m = s.value() * inv;
            d.known.second_moments.push_back(0.5 * (m + m.adjoint()));
        }
        d.known.noise_diag = noise_.value() * inv;
        d.known.n_mc = blocks_;
        d.unknown_cov = unknown_.value() * inv;
        d.unknown_cov = (0.5 * (d.unknown_cov + d.unknown_cov.adjoint())).eval();
        return d;
    }

private:
    Eigen::Index n_;
    CompensatedSum<CVec> g_kk_;
    std::vector<CompensatedSum<CMat>> second_;
    CompensatedSum<RVec> noise_;
    CompensatedSum<CMat> unknown_;
    std::size_t blocks_ = 0;
};

inline CVec form_combiner(CombinerKind kind, const CMat &hhat_known, std::span<const double> known_power, double sigma2,
                          std::size_t k)
{
    if (kind == CombinerKind::mr)
        return mr_combiner(hhat_known.col(static_cast<Eigen::Index>(k)));
    return rzf_combiner(hhat_known, known_power, sigma2, k);
}

inline DropStatistics simulate_full(const ChannelStatistics &s, double sigma2, const MonteCarloConfig &cfg, Rng &rng)
{
    const std::size_t K = s.num_ues();
    const std::size_t Kn = s.num_known;
    const std::size_t Ls = s.num_aps;
    const auto N = static_cast<Eigen::Index>(s.N);
    const auto n_ap = static_cast<Eigen::Index>(Ls);

    std::vector<CMat> B(s.R.size());
    for (std::size_t j = 0; j < s.R.size(); ++j)
        B[j] = channel::psd_factor(s.R[j]);
    const channel::ChannelEstimator est(s, sigma2);
    const std::span<const double> known_power(s.power.data(), Kn);

    NormalSampler normal;
    Accumulator acc(Ls, Kn);
    std::vector<CVec> h(K, CVec::Zero(N));
    std::vector<CVec> y(s.tau_p);
    CMat hhat(N, static_cast<Eigen::Index>(Kn));
    CMat g(n_ap, static_cast<Eigen::Index>(K));
    RVec noise(n_ap);
    std::vector<CMat> second(Kn);
    for (std::size_t b = 0; b < cfg.n_mc; ++b) {
        for (std::size_t l = 0; l < Ls; ++l) {
            for (std::size_t i = 0; i < K; ++i) {
                const CMat &f = B[i * Ls + l];
                h[i] = f.cols() == 0 ? CVec::Zero(N) : channel::sample_with_factor(f, rng, normal);
            }
            for (std::size_t t = 0; t < s.tau_p; ++t)
                y[t] = channel::received_pilot(t, h, s.pilot_of, s.power, s.tau_p, sigma2, rng, normal);
            for (std::size_t k = 0; k < Kn; ++k)
                hhat.col(static_cast<Eigen::Index>(k)) =
                    cfg.estimation == EstimationMode::perfect ? h[k] : est.estimate(k, l, y[s.pilot_of[k]]);
            const CVec v = form_combiner(cfg.combiner, hhat, known_power, sigma2, cfg.desired);
            for (std::size_t i = 0; i < K; ++i)
                g(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = std::sqrt(s.power[i]) * v.dot(h[i]);
            noise[static_cast<Eigen::Index>(l)] = sigma2 * v.squaredNorm();
        }
        for (std::size_t i = 0; i < Kn; ++i) {
            const auto gi = g.col(static_cast<Eigen::Index>(i));
            second[i] = gi * gi.adjoint();
        }
        const auto gu = g.rightCols(static_cast<Eigen::Index>(K - Kn));
        acc.add(g.col(static_cast<Eigen::Index>(cfg.desired)), second, noise, gu * gu.adjoint());
    }
    return acc.finish();
}

// Hermitian Toeplitz test: R(a, b) depends on a - b only. Fills r[d + N - 1]
// with R(a, b) for d = a - b.
inline bool toeplitz_coefficients(const CMat &R, std::vector<cplx> &r)
{
    const Eigen::Index n = R.rows();
    r.assign(static_cast<std::size_t>(2 * n - 1), cplx{});
    const double tol = 1e-12 * std::max(std::sqrt(R.cwiseAbs2().maxCoeff()), std::numeric_limits<double>::min());
    for (Eigen::Index d = -(n - 1); d < n; ++d) {
        const cplx ref = d >= 0 ? R(d, 0) : R(0, -d);
        r[static_cast<std::size_t>(d + n - 1)] = ref;
        for (Eigen::Index b = std::max<Eigen::Index>(0, -d); b < n && b + d < n; ++b)
            if (std::norm(R(b + d, b) - ref) > tol * tol)
                return false;
    }
    return true;
}

inline DropStatistics simulate_conditional(const ChannelStatistics &s, double sigma2, const MonteCarloConfig &cfg,
                                           Rng &rng)
{
    const std::size_t K = s.num_ues();
    const std::size_t Kn = s.num_known;
    const std::size_t Ls = s.num_aps;
    const std::size_t T = s.tau_p;
    const auto N = static_cast<Eigen::Index>(s.N);
    const auto n_ap = static_cast<Eigen::Index>(Ls);
    const auto nlag = 2 * N - 1;
    const double tp = static_cast<double>(T);

    std::vector<std::size_t> all(K);
    for (std::size_t i = 0; i < K; ++i)
        all[i] = i;
    std::vector<std::vector<std::size_t>> members(T), known_members(T);
    for (std::size_t i = 0; i < K; ++i) {
        members[s.pilot_of[i]].push_back(i);
        if (i < Kn)
            known_members[s.pilot_of[i]].push_back(i);
    }

    // Pilot observation y = L w with Q = L L^H the full pilot covariance, so
    // E{h_il | y} = sqrt(tau_p p_i) R_il z with z = Q^-1 y = L^-H w, and
    // Cov{h_il | y} = R_il - tau_p p_i R_il Q^-1 R_il.
    std::vector<CMat> q_lower(Ls * T);
    std::vector<CMat> q_inv_adj(Ls * T); // L^-H
    std::vector<CMat> C_known(Kn * Ls);
    std::vector<CMat> C_unknown(Ls, CMat::Zero(N, N));
    std::vector<CMat> G(K * Ls); // sqrt(p_i) sqrt(tau_p p_i) R_il
    std::vector<std::vector<cplx>> lag(K * Ls);
    bool toeplitz = true;
    for (std::size_t l = 0; l < Ls; ++l) {
        std::vector<Eigen::LLT<CMat>> llt(T);
        for (std::size_t t = 0; t < T; ++t) {
            llt[t].compute(channel::pilot_covariance(s, t, l, all, sigma2));
            if (llt[t].info() != Eigen::Success)
                throw NumericalError("Monte Carlo: pilot covariance is not positive definite");
            q_lower[l * T + t] = llt[t].matrixL();
            CMat inv = CMat::Identity(N, N);
            q_lower[l * T + t].triangularView<Eigen::Lower>().solveInPlace(inv);
            q_inv_adj[l * T + t] = inv.adjoint();
        }
        for (std::size_t i = 0; i < K; ++i) {
            const CMat &R = s.corr(i, l);
            const double c = tp * s.power[i];
            const double scale = std::sqrt(c * s.power[i]);
            G[i * Ls + l] = scale * R;
            toeplitz = toeplitz_coefficients(R, lag[i * Ls + l]) && toeplitz;
            for (auto &x : lag[i * Ls + l])
                x *= scale;
            CMat cond = R - c * (R * llt[s.pilot_of[i]].solve(R));
            cond = (0.5 * (cond + cond.adjoint())).eval();
            if (i < Kn)
                C_known[i * Ls + l] = std::move(cond);
            else
                C_unknown[l] += s.power[i] * cond;
        }
    }

    // Known estimates per pilot group, hhat = W L w, stacked vertically.
    // Toeplitz path: the group's lag coefficients stacked so that
    // s = Rlag c with c(d) = sum_b conj(v_{b+d}) z_b.
    const channel::ChannelEstimator est(s, sigma2);
    std::vector<CMat> est_group(Ls * T);
    std::vector<CMat> rlag(Ls * T);
    for (std::size_t l = 0; l < Ls; ++l) {
        for (std::size_t t = 0; t < T; ++t) {
            const auto &km = known_members[t];
            CMat &E = est_group[l * T + t];
            E.resize(N * static_cast<Eigen::Index>(km.size()), N);
            for (std::size_t r = 0; r < km.size(); ++r)
                E.middleRows(static_cast<Eigen::Index>(r) * N, N) =
                    est.matrix(km[r], l) * q_lower[l * T + t].triangularView<Eigen::Lower>();
            if (!toeplitz)
                continue;
            CMat &m = rlag[l * T + t];
            m.resize(static_cast<Eigen::Index>(members[t].size()), nlag);
            for (std::size_t r = 0; r < members[t].size(); ++r)
                for (Eigen::Index j = 0; j < nlag; ++j)
                    m(static_cast<Eigen::Index>(r), j) = lag[members[t][r] * Ls + l][static_cast<std::size_t>(j)];
        }
    }
    const std::span<const double> known_power(s.power.data(), Kn);

    NormalSampler normal;
    Accumulator acc(Ls, Kn);
    std::vector<CMat> vv(Ls, CMat::Zero(N, N)); // sum of v v^H, summed in block order
    CMat vshift = CMat::Zero(nlag, N);
    CMat lags(nlag, static_cast<Eigen::Index>(T));
    CVec group, stacked;
    CMat Wn(N, static_cast<Eigen::Index>(T));
    CMat Z(N, static_cast<Eigen::Index>(T));
    CMat hhat(N, static_cast<Eigen::Index>(Kn));
    CVec v(N), tmp(N);
    CMat sbar(n_ap, static_cast<Eigen::Index>(K)); // sqrt(p_i) v_l^H E{h_il | y}
    RVec noise(n_ap);
    std::vector<CMat> second(Kn, CMat(n_ap, n_ap));
    CMat unknown(n_ap, n_ap);
    for (std::size_t b = 0; b < cfg.n_mc; ++b) {
        for (std::size_t l = 0; l < Ls; ++l) {
            const auto li = static_cast<Eigen::Index>(l);
            for (std::size_t t = 0; t < T; ++t) {
                const auto ti = static_cast<Eigen::Index>(t);
                normal.fill_complex(rng, Wn.col(ti));
                Z.col(ti).noalias() = q_inv_adj[l * T + t].triangularView<Eigen::Upper>() * Wn.col(ti);
                const auto &km = known_members[t];
                if (km.empty())
                    continue;
                stacked.noalias() = est_group[l * T + t] * Wn.col(ti);
                for (std::size_t r = 0; r < km.size(); ++r)
                    hhat.col(static_cast<Eigen::Index>(km[r])) = stacked.segment(static_cast<Eigen::Index>(r) * N, N);
            }
            v = form_combiner(cfg.combiner, hhat, known_power, sigma2, cfg.desired);
            if (toeplitz) {
                for (Eigen::Index d = -(N - 1); d < N; ++d)
                    for (Eigen::Index bb = std::max<Eigen::Index>(0, -d); bb < N && bb + d < N; ++bb)
                        vshift(d + N - 1, bb) = std::conj(v[bb + d]);
                lags.noalias() = vshift * Z;
                for (std::size_t t = 0; t < T; ++t) {
                    if (members[t].empty())
                        continue;
                    group.noalias() = rlag[l * T + t] * lags.col(static_cast<Eigen::Index>(t));
                    for (std::size_t r = 0; r < members[t].size(); ++r)
                        sbar(li, static_cast<Eigen::Index>(members[t][r])) = group[static_cast<Eigen::Index>(r)];
                }
            } else {
                for (std::size_t i = 0; i < K; ++i) {
                    tmp.noalias() = G[i * Ls + l] * Z.col(static_cast<Eigen::Index>(s.pilot_of[i]));
                    sbar(li, static_cast<Eigen::Index>(i)) = v.dot(tmp);
                }
            }
            vv[l].noalias() += v * v.adjoint();
            noise[li] = sigma2 * v.squaredNorm();
        }
        for (std::size_t i = 0; i < Kn; ++i) {
            const auto si = sbar.col(static_cast<Eigen::Index>(i));
            second[i].noalias() = si * si.adjoint();
        }
        const auto su = sbar.rightCols(static_cast<Eigen::Index>(K - Kn));
        unknown.noalias() = su * su.adjoint();
        acc.add(sbar.col(static_cast<Eigen::Index>(cfg.desired)), second, noise, unknown);
    }

    // Conditional-covariance terms are linear in v v^H: add
    // p_i tr(C_il E{v_l v_l^H}) to the diagonals once.
    DropStatistics out = acc.finish();
    const double inv = 1.0 / static_cast<double>(cfg.n_mc);
    for (std::size_t l = 0; l < Ls; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        const CMat Ev = vv[l] * inv;
        for (std::size_t i = 0; i < Kn; ++i)
            out.known.second_moments[i](li, li) += s.power[i] * (C_known[i * Ls + l].cwiseProduct(Ev.transpose())).sum().real();
        out.unknown_cov(li, li) += (C_unknown[l].cwiseProduct(Ev.transpose())).sum().real();
    }
    return out;
}

} // namespace detail

/// Monte Carlo over n_mc coherence blocks of one drop: pilot phase, local
/// combining for the desired UE, and accumulation of every g_ki moment.
inline DropStatistics simulate_drop(const ChannelStatistics &s, double sigma2, const MonteCarloConfig &cfg, Rng &rng)
{
    s.validate();
    cfg.validate(s);
    if (!(sigma2 > 0.0))
        throw ConfigError("Monte Carlo: noise power must be positive");
    return cfg.sampling == SamplingMode::full ? detail::simulate_full(s, sigma2, cfg, rng)
                                              : detail::simulate_conditional(s, sigma2, cfg, rng);
}

inline CombinedChannelStats combined_channel_stats(const ChannelStatistics &s, double sigma2,
                                                   const MonteCarloConfig &cfg, Rng &rng)
{
    return simulate_drop(s, sigma2, cfg, rng).known;
}

inline RVec per_ap_unknown_power(const ChannelStatistics &s, double sigma2, const MonteCarloConfig &cfg, Rng &rng)
{
    return simulate_drop(s, sigma2, cfg, rng).unknown_power();
}

inline CMat unknown_covariance_matrix(const ChannelStatistics &s, double sigma2, const MonteCarloConfig &cfg, Rng &rng)
{
    return simulate_drop(s, sigma2, cfg, rng).unknown_cov;
}

/// Per-AP unknown power for fixed combiners v_l: sum_i p_i mean |v_l^H h_il|^2
/// over n_mc independent channel draws. R[i][l] is UE i's correlation at AP l.
inline RVec per_ap_unknown_power(std::span<const CVec> v, const std::vector<std::vector<CMat>> &R,
                                 std::span<const double> power, std::size_t n_mc, Rng &rng)
{
    const auto n_ap = static_cast<Eigen::Index>(v.size());
    RVec out = RVec::Zero(n_ap);
    if (R.empty() || n_mc == 0)
        return out;
    NormalSampler normal;
    for (std::size_t i = 0; i < R.size(); ++i) {
        for (std::size_t l = 0; l < v.size(); ++l) {
            const CMat B = channel::psd_factor(R[i][l]);
            CompensatedSum<double> acc;
            for (std::size_t b = 0; b < n_mc; ++b) {
                if (B.cols() == 0)
                    break;
                const CVec h = channel::sample_with_factor(B, rng, normal);
                acc.add(std::norm(v[l].dot(h)));
            }
            out[static_cast<Eigen::Index>(l)] += power[i] * acc.value() / static_cast<double>(n_mc);
        }
    }
    return out;
}

/// Sample-weighted average of per-drop statistics.
inline CombinedChannelStats average_stats(std::span<const CombinedChannelStats> drops)
{
    if (drops.empty())
        throw ConfigError("average_stats: no drops");
    const auto n = static_cast<Eigen::Index>(drops.front().num_aps());
    CompensatedSum<CVec> g(CVec::Zero(n));
    CompensatedSum<RVec> noise(RVec::Zero(n));
    std::vector<CompensatedSum<CMat>> second(drops.front().second_moments.size(), CompensatedSum<CMat>(CMat::Zero(n, n)));
    double total = 0.0;
    std::size_t blocks = 0;
    for (const auto &d : drops) {
        const double w = static_cast<double>(d.n_mc);
        g.add(d.mean_g_kk * w);
        noise.add(d.noise_diag * w);
        for (std::size_t i = 0; i < second.size(); ++i)
            second[i].add(d.second_moments[i] * w);
        total += w;
        blocks += d.n_mc;
    }
    CombinedChannelStats out;
    out.mean_g_kk = g.value() / total;
    out.noise_diag = noise.value() / total;
    for (const auto &s : second)
        out.second_moments.push_back(s.value() / total);
    out.n_mc = blocks;
    return out;
}

/// a = (sum_i E{g_ki g_ki^H} + F)^-1 E{g_kk} with F the processed-noise covariance.
inline CVec lsfd_weights(const CombinedChannelStats &stats)
{
    const CMat A = stats.known_sum() + stats.noise_matrix();
    const Eigen::LDLT<CMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("lsfd_weights: fusion matrix factorization failed");
    return ldlt.solve(stats.mean_g_kk);
}

struct SinrDecomposition {
    CVec a;
    cplx DS;
    double IUSI = 0.0;
    double noise_term = 0.0;
    double IUI_true = 0.0;
    RVec weights_sq;

    double sinr() const { return std::norm(DS) / (IUI_true + IUSI + noise_term); }
    /// SINR with the unknown interference term left out.
    double sinr_known_only() const { return std::norm(DS) / (IUSI + noise_term); }
};

inline SinrDecomposition sinr_decomposition(const CombinedChannelStats &stats, const CVec &a, const CMat &unknown_cov)
{
    SinrDecomposition d;
    d.a = a;
    d.DS = a.dot(stats.mean_g_kk);
    const double total = a.dot(stats.known_sum() * a).real();
    const double iusi = total - std::norm(d.DS);
    if (iusi < -1e-9 * std::max(total, std::numeric_limits<double>::min()))
        throw NumericalError("sinr_decomposition: negative interference-plus-self-interference power");
    d.IUSI = std::max(iusi, 0.0);
    d.noise_term = a.dot(stats.noise_matrix() * a).real();
    d.IUI_true = unknown_cov.size() == 0 ? 0.0 : std::max(0.0, a.dot(unknown_cov * a).real());
    d.weights_sq = a.cwiseAbs2();
    if (!(d.noise_term > 0.0))
        throw NumericalError("sinr_decomposition: processed noise power must be positive");
    return d;
}

inline double se_from_sinr(double sinr, double tau_u, double tau_c)
{
    if (!(sinr >= 0.0))
        throw ConfigError("se_from_sinr: SINR must be non-negative");
    return tau_u / tau_c * std::log2(1.0 + sinr);
}

} // namespace cfmimo::receiver

#endif
