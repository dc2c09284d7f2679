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

#ifndef CFMIMO_CHANNEL_HPP
#define CFMIMO_CHANNEL_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/core/types.hpp"
#include "cfmimo/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cfmimo::channel {

using scenario::CorrelationModel;

namespace detail {

// Trapezoid rule for a standard normal on [-8.5, 8.5]; weights normalized to
// sum to one. The integrand exp(j pi d sin(theta + asd x)) has frequencies up
// to about pi (N - 1) asd in x, so the step is chosen to keep the aliased
// copies of the Gaussian spectrum below double precision.
struct NormalNodes {
    std::vector<double> x;
    std::vector<double> w;

    NormalNodes(double asd, std::size_t N)
    {
        const double band = (1.2 * pi * static_cast<double>(N > 0 ? N - 1 : 0) + 15.0) * asd + 10.0;
        const double h = std::min(0.25, 2.0 * pi / band);
        const auto half = static_cast<int>(std::floor(8.5 / h));
        double total = 0.0;
        for (int i = -half; i <= half; ++i) {
            x.push_back(h * i);
            w.push_back(std::exp(-0.5 * x.back() * x.back()));
            total += w.back();
        }
        for (double &wi : w)
            wi /= total;
    }
};

} // namespace detail

/// Half-wavelength ULA, Gaussian local scattering around nominal angle theta
/// with angular standard deviation asd (radians):
///
///   R(m, n) = E[exp(j pi (m - n) sin(theta + delta))],  delta ~ N(0, asd^2).
///
/// Toeplitz Hermitian with unit diagonal.
inline CMat local_scattering_matrix(double theta, double asd, std::size_t N)
{
    const auto n = static_cast<Eigen::Index>(N);
    std::vector<cplx> r(N, cplx{});
    if (asd == 0.0) {
        const cplx step = std::polar(1.0, pi * std::sin(theta));
        cplx z = 1.0;
        for (std::size_t d = 0; d < N; ++d, z *= step)
            r[d] = z;
    } else {
        const detail::NormalNodes q(asd, N);
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const cplx step = std::polar(1.0, pi * std::sin(theta + asd * q.x[i]));
            cplx z = q.w[i];
            for (std::size_t d = 0; d < N; ++d, z *= step)
                r[d] += z;
        }
        r[0] = 1.0;
    }
    CMat R(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto d = static_cast<std::size_t>(a >= b ? a - b : b - a);
            R(a, b) = a >= b ? r[d] : std::conj(r[d]);
        }
    }
    return R;
}

inline CMat correlation_matrix(const Point2 &ap, const Point2 &ue, double beta, std::size_t N, double asd_deg,
                               CorrelationModel model)
{
    const auto n = static_cast<Eigen::Index>(N);
    if (model == CorrelationModel::uncorrelated)
        return CMat::Identity(n, n) * beta;
    const double theta = std::atan2(ue.y - ap.y, ue.x - ap.x);
    return beta * local_scattering_matrix(theta, asd_deg * pi / 180.0, N);
}

/// B with B B^H = R from the Hermitian eigendecomposition. Eigenvalues below
/// 1e-12 of the largest are clipped to zero; any eigenvalue below
/// -1e-9 tr(R)/N is an error.
inline CMat psd_factor(const CMat &R)
{
    const Eigen::Index n = R.rows();
    if (R.cols() != n)
        throw ConfigError("psd_factor: matrix must be square");
    if (n == 0)
        return CMat(0, 0);
    const double scale = R.trace().real() / static_cast<double>(n);
    if (R.cwiseAbs().maxCoeff() == 0.0)
        return CMat::Zero(n, 0);
    const Eigen::SelfAdjointEigenSolver<CMat> es(R);
    if (es.info() != Eigen::Success)
        throw NumericalError("psd_factor: eigendecomposition failed");
    const RVec &lam = es.eigenvalues();
    if (lam.minCoeff() < -1e-9 * std::abs(scale))
        throw NumericalError("psd_factor: matrix has a significantly negative eigenvalue");
    const double clip = 1e-12 * lam.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (lam[i] > clip)
            keep.push_back(i);
    CMat B(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        B.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(lam[keep[j]]);
    return B;
}

/// h = B w with w ~ CN(0, I).
inline CVec sample_with_factor(const CMat &B, Rng &rng, NormalSampler &normal)
{
    CVec w(B.cols());
    normal.fill_complex(rng, w);
    return B * w;
}

inline CVec sample_channel(const CMat &R, Rng &rng)
{
    NormalSampler normal;
    const CMat B = psd_factor(R);
    if (B.cols() == 0)
        return CVec::Zero(R.rows());
    return sample_with_factor(B, rng, normal);
}

/// Second-order statistics of every UE at the serving APs of one drop.
/// UEs [0, num_known) form the known set (0 is the desired UE), the rest are
/// unknown interferers. Pilots are 0-based.
struct ChannelStatistics {
    std::size_t N = 0;
    std::size_t num_aps = 0;
    std::size_t num_known = 0;
    std::size_t tau_p = 1;
    std::vector<CMat> R; ///< R[k * num_aps + l]
    std::vector<std::size_t> pilot_of;
    std::vector<double> power;

    std::size_t num_ues() const { return pilot_of.size(); }
    std::size_t num_unknown() const { return num_ues() - num_known; }
    const CMat &corr(std::size_t k, std::size_t l) const { return R[k * num_aps + l]; }
    double beta(std::size_t k, std::size_t l) const { return corr(k, l).trace().real() / static_cast<double>(N); }

    std::vector<std::size_t> known_set() const
    {
        std::vector<std::size_t> s(num_known);
        std::iota(s.begin(), s.end(), std::size_t{0});
        return s;
    }

    std::vector<std::size_t> unknown_set() const
    {
        std::vector<std::size_t> s(num_unknown());
        std::iota(s.begin(), s.end(), num_known);
        return s;
    }

    void validate() const
    {
        if (N == 0 || num_aps == 0 || tau_p == 0)
            throw ConfigError("ChannelStatistics: N, num_aps and tau_p must be positive");
        if (num_known == 0 || num_known > num_ues())
            throw ConfigError("ChannelStatistics: known set must be non-empty and within the UE range");
        if (power.size() != num_ues() || R.size() != num_ues() * num_aps)
            throw ConfigError("ChannelStatistics: inconsistent sizes");
        for (std::size_t t : pilot_of)
            if (t >= tau_p)
                throw ConfigError("ChannelStatistics: pilot index out of range");
        for (const CMat &r : R)
            if (r.rows() != static_cast<Eigen::Index>(N) || r.cols() != static_cast<Eigen::Index>(N))
                throw ConfigError("ChannelStatistics: correlation matrix has the wrong size");
    }
};

/// Correlation matrices for all (UE, AP) pairs; beta is UEs x APs (linear).
inline std::vector<CMat> build_correlations(const std::vector<Point2> &aps, const std::vector<Point2> &ues,
                                            const RMat &beta, std::size_t N, double asd_deg, CorrelationModel model)
{
    std::vector<CMat> R;
    R.reserve(ues.size() * aps.size());
    for (std::size_t k = 0; k < ues.size(); ++k)
        for (std::size_t l = 0; l < aps.size(); ++l)
            R.push_back(correlation_matrix(aps[l], ues[k], beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)),
                                           N, asd_deg, model));
    return R;
}

/// Greedy pilot assignment for the known UEs. beta is known UEs x serving APs.
/// The tau_p UEs with the largest max-over-APs gain receive distinct pilots; each
/// remaining UE, strongest first, joins the pilot with the least received pilot
/// power sum_{i on t} p_i beta_{i, l*} at its own strongest AP l*. Ties go to the
/// lowest pilot index.
inline std::vector<std::size_t> assign_known_pilots(const RMat &beta, std::span<const double> power, std::size_t tau_p)
{
    const auto k_n = static_cast<std::size_t>(beta.rows());
    if (tau_p == 0)
        throw ConfigError("assign_pilots: tau_p must be positive");
    if (power.size() != k_n)
        throw ConfigError("assign_pilots: one power per known UE required");
    std::vector<std::size_t> order(k_n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> strongest(k_n);
    std::vector<Eigen::Index> best_ap(k_n);
    for (std::size_t k = 0; k < k_n; ++k)
        strongest[k] = beta.row(static_cast<Eigen::Index>(k)).maxCoeff(&best_ap[k]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strongest[a] > strongest[b]; });

    std::vector<std::size_t> pilot(k_n, 0);
    std::vector<std::vector<std::size_t>> members(tau_p);
    for (std::size_t r = 0; r < k_n; ++r) {
        const std::size_t k = order[r];
        std::size_t choice = 0;
        if (r < tau_p) {
            choice = r;
        } else {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < tau_p; ++t) {
                double load = 0.0;
                for (std::size_t i : members[t])
                    load += power[i] * beta(static_cast<Eigen::Index>(i), best_ap[k]);
                if (load < best) {
                    best = load;
                    choice = t;
                }
            }
        }
        pilot[k] = choice;
        members[choice].push_back(k);
    }
    return pilot;
}

inline std::vector<std::size_t> assign_unknown_pilots(std::size_t count, std::size_t tau_p, Rng &rng)
{
    std::uniform_int_distribution<std::size_t> u(0, tau_p - 1);
    std::vector<std::size_t> out(count);
    for (auto &t : out)
        t = u(rng);
    return out;
}

/// Known UEs first, then num_unknown uniformly random pilots.
inline std::vector<std::size_t> assign_pilots(const RMat &known_beta, std::span<const double> known_power,
                                              std::size_t num_unknown, std::size_t tau_p, Rng &rng)
{
    auto pilots = assign_known_pilots(known_beta, known_power, tau_p);
    const auto extra = assign_unknown_pilots(num_unknown, tau_p, rng);
    pilots.insert(pilots.end(), extra.begin(), extra.end());
    return pilots;
}

/// Pilot observation at one AP: sum over UEs on pilot t of sqrt(tau_p p_i) h_i
/// plus CN(0, sigma2 I) noise. h holds one channel per UE at this AP.
inline CVec received_pilot(std::size_t t, std::span<const CVec> h, std::span<const std::size_t> pilot_of,
                           std::span<const double> power, std::size_t tau_p, double sigma2, Rng &rng,
                           NormalSampler &normal)
{
    if (h.empty())
        throw ConfigError("received_pilot: no channels given");
    const Eigen::Index n = h.front().size();
    CVec y(n);
    normal.fill_complex(rng, y);
    y *= std::sqrt(sigma2);
    const double tp = static_cast<double>(tau_p);
    for (std::size_t i = 0; i < h.size(); ++i)
        if (pilot_of[i] == t)
            y += std::sqrt(tp * power[i]) * h[i];
    return y;
}

/// Pilot-phase covariance at AP l: sum over UEs of `members` on pilot t of
/// tau_p p_i R_il, plus sigma2 I.
inline CMat pilot_covariance(const ChannelStatistics &s, std::size_t t, std::size_t l, std::span<const std::size_t> members,
                             double sigma2)
{
    const auto n = static_cast<Eigen::Index>(s.N);
    CMat Q = CMat::Identity(n, n) * sigma2;
    const double tp = static_cast<double>(s.tau_p);
    for (std::size_t i : members)
        if (s.pilot_of[i] == t)
            Q += (tp * s.power[i]) * s.corr(i, l);
    return Q;
}

/// Linear MMSE-form estimators built from known-UE statistics only:
/// hhat_kl = sqrt(tau_p p_k) R_kl Q_known^-1 y, for every known k and serving AP l.
class ChannelEstimator {
public:
    ChannelEstimator(const ChannelStatistics &s, double sigma2) : num_aps_(s.num_aps)
    {
        if (!(sigma2 > 0.0))
            throw ConfigError("ChannelEstimator: noise power must be positive");
        const auto known = s.known_set();
        W_.resize(s.num_known * s.num_aps);
        const double tp = static_cast<double>(s.tau_p);
        for (std::size_t l = 0; l < s.num_aps; ++l) {
            for (std::size_t t = 0; t < s.tau_p; ++t) {
                bool used = false;
                for (std::size_t k : known)
                    used = used || s.pilot_of[k] == t;
                if (!used)
                    continue;
                const Eigen::LLT<CMat> llt(pilot_covariance(s, t, l, known, sigma2));
                if (llt.info() != Eigen::Success)
                    throw NumericalError("ChannelEstimator: pilot covariance is not positive definite");
                for (std::size_t k : known) {
                    if (s.pilot_of[k] != t)
                        continue;
                    // R Q^-1 = (Q^-1 R)^H for Hermitian R and Q.
                    W_[k * num_aps_ + l] = std::sqrt(tp * s.power[k]) * llt.solve(s.corr(k, l)).adjoint();
                }
            }
        }
    }

    const CMat &matrix(std::size_t k, std::size_t l) const { return W_[k * num_aps_ + l]; }

    CVec estimate(std::size_t k, std::size_t l, const CVec &y) const { return matrix(k, l) * y; }

private:
    std::size_t num_aps_;
    std::vector<CMat> W_;
};

inline CVec estimate_channel(const CVec &y, std::size_t k, std::size_t l, const ChannelStatistics &s, double sigma2)
{
    if (k >= s.num_known)
        throw ConfigError("estimate_channel: only known UEs can be estimated");
    const auto known = s.known_set();
    const Eigen::LLT<CMat> llt(pilot_covariance(s, s.pilot_of[k], l, known, sigma2));
    if (llt.info() != Eigen::Success)
        throw NumericalError("estimate_channel: pilot covariance is not positive definite");
    const double tp = static_cast<double>(s.tau_p);
    return std::sqrt(tp * s.power[k]) * (s.corr(k, l) * llt.solve(y));
}

} // namespace cfmimo::channel

#endif
