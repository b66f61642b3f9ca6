#ifndef CDT_KALMAN_HPP
#define CDT_KALMAN_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/layout.hpp"
#include "cdt/series.hpp"

namespace cdt {

/// Isotropic noise settings: Q = q I, R = r I, P0 = p0 I.
/// x0 empty means a zero initial mean.
template <typename Scalar = double>
struct NoiseConfig {
    Scalar q = Scalar(1e-5);
    Scalar r = Scalar(1);
    Scalar p0 = Scalar(1);
    VectorX<Scalar> x0;

    void check(int dim) const {
        if (q < Scalar(0)) throw validation_error("process noise q must be >= 0");
        if (!(r > Scalar(0))) throw validation_error("measurement noise r must be > 0");
        if (!(p0 > Scalar(0))) throw validation_error("initial variance p0 must be > 0");
        if (x0.size() != 0 && x0.size() != dim)
            throw validation_error("x0 length does not match state dimension");
    }
};

/// Gaussian state estimate at time index n.
template <typename Scalar = double>
struct Belief {
    int n = 0;
    VectorX<Scalar> mean;
    MatrixX<Scalar> cov;
};

template <typename Scalar>
void symmetrize(MatrixX<Scalar>& m) {
    m = ((m + m.transpose()) * Scalar(0.5)).eval();
}

/// Random-walk prediction: identity transition, additive isotropic Q.
template <typename Scalar>
Belief<Scalar> predict(const Belief<Scalar>& belief, Scalar q) {
    if (q < Scalar(0)) throw validation_error("process noise q must be >= 0");
    Belief<Scalar> out = belief;
    out.n += 1;
    out.cov.diagonal().array() += q;
    return out;
}

template <typename Scalar = double>
struct UpdateResult {
    Belief<Scalar> belief;
    VectorX<Scalar> innovation;
    MatrixX<Scalar> innovation_cov;
    Scalar loglik = Scalar(0);
};

/// Measurement update with Joseph-form covariance and explicit
/// symmetrization. loglik is the Gaussian log-density of the innovation
/// under N(0, S).
template <typename Scalar>
UpdateResult<Scalar> update(const Belief<Scalar>& belief, const MatrixX<Scalar>& h,
                            const VectorX<Scalar>& y, Scalar r) {
    if (!(r > Scalar(0))) throw validation_error("measurement noise r must be > 0");
    const int dim = static_cast<int>(belief.mean.size());
    const int g = static_cast<int>(y.size());
    if (h.cols() != dim || h.rows() != g)
        throw validation_error("observation matrix dimensions do not match");

    const MatrixX<Scalar>& p = belief.cov;
    MatrixX<Scalar> s = h * p * h.transpose();
    s.diagonal().array() += r;
    symmetrize(s);

    Eigen::LDLT<MatrixX<Scalar>> ldlt(s);
    const auto d = ldlt.vectorD();
    const Scalar d_min = d.minCoeff();
    const Scalar d_max = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || !(d_min > Scalar(0)) || d_max / d_min > Scalar(1e14))
        throw numerical_error("innovation covariance is singular or ill-conditioned");

    const VectorX<Scalar> innovation = y - h * belief.mean;
    const MatrixX<Scalar> gain = ldlt.solve(h * p).transpose(); // = P H^T S^{-1}

    UpdateResult<Scalar> out;
    out.belief.n = belief.n;
    out.belief.mean = belief.mean + gain * innovation;
    const MatrixX<Scalar> ikh = MatrixX<Scalar>::Identity(dim, dim) - gain * h;
    out.belief.cov = ikh * p * ikh.transpose() + r * gain * gain.transpose();
    symmetrize(out.belief.cov);
    out.innovation = innovation;
    out.innovation_cov = std::move(s);
    out.loglik = Scalar(-0.5) * (g * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
                                 d.array().log().sum() +
                                 innovation.dot(ldlt.solve(innovation)));
    return out;
}

/// One filter step: prediction for measurement index n, then the update
/// unless the lag-1 pair spans a contiguity break (updated == false; the
/// filtered belief then equals the predicted one and the innovation slots
/// are zero).
template <typename Scalar = double>
struct FilterStep {
    int n = 0;
    bool updated = false;
    Belief<Scalar> predicted;
    Belief<Scalar> filtered;
    VectorX<Scalar> innovation;
    MatrixX<Scalar> innovation_cov;
    Scalar loglik = Scalar(0);
};

template <typename Scalar = double>
struct FilterResult {
    std::vector<FilterStep<Scalar>> steps;
    std::vector<int> measurement_indices; // n with updated == true
    Scalar total_loglik = Scalar(0);
    int channels = 0;
};

/// Forward Kalman pass over the series. Measurement index 0 has no lag-1
/// regressor and is dropped; steps cover n = 1 .. N-1. Across contiguity
/// breaks the prediction advances but no update is applied.
template <typename Scalar>
FilterResult<Scalar> filter_pass(const ObservationSeries<Scalar>& series,
                                 const StateLayout& layout, const NoiseConfig<Scalar>& noise) {
    if (series.samples() < 2) throw validation_error("series needs at least 2 samples");
    if (series.channels() != layout.nodes())
        throw validation_error("series channel count does not match layout");
    noise.check(layout.dim());

    const int g = layout.nodes();
    const int dim = layout.dim();
    Belief<Scalar> belief;
    belief.n = 0;
    belief.mean = noise.x0.size() ? noise.x0 : VectorX<Scalar>::Zero(dim);
    belief.cov = noise.p0 * MatrixX<Scalar>::Identity(dim, dim);

    FilterResult<Scalar> result;
    result.channels = g;
    result.steps.reserve(series.samples() - 1);
    for (int n = 1; n < series.samples(); ++n) {
        FilterStep<Scalar> step;
        step.n = n;
        step.predicted = predict(belief, noise.q);
        if (series.contiguous_with_previous[n]) {
            const VectorX<Scalar> y_now = series.values.row(n).transpose();
            const VectorX<Scalar> y_prev = series.values.row(n - 1).transpose();
            const MatrixX<Scalar> h = build_observation_matrix(y_now, y_prev, layout);
            auto up = update(step.predicted, h, y_now, noise.r);
            step.updated = true;
            step.filtered = std::move(up.belief);
            step.innovation = std::move(up.innovation);
            step.innovation_cov = std::move(up.innovation_cov);
            step.loglik = up.loglik;
            result.total_loglik += up.loglik;
            result.measurement_indices.push_back(n);
        } else {
            step.filtered = step.predicted;
            step.innovation = VectorX<Scalar>::Zero(g);
            step.innovation_cov = MatrixX<Scalar>::Zero(g, g);
        }
        belief = step.filtered;
        result.steps.push_back(std::move(step));
    }
    return result;
}

namespace detail {

/// Pseudo-inverse of a symmetric PSD matrix via eigenvalue thresholding.
/// Eigenvalues below tol * max are treated as zero, so a rank-deficient
/// predicted covariance (q = 0 runs) does not break the backward pass.
template <typename Scalar>
MatrixX<Scalar> psd_pinv(const MatrixX<Scalar>& m, Scalar rel_tol = Scalar(1e-12)) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    const Scalar cutoff = vals.cwiseAbs().maxCoeff() * rel_tol;
    VectorX<Scalar> inv = vals;
    for (int i = 0; i < inv.size(); ++i)
        inv[i] = vals[i] > cutoff ? Scalar(1) / vals[i] : Scalar(0);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Backward RTS recursion over steps [first, last], seeded with the filtered
/// belief at `last`. Writes smoothed beliefs for indices first..last into out
/// (same indexing as steps).
template <typename Scalar>
void rts_backward(const std::vector<FilterStep<Scalar>>& steps, int first, int last,
                  std::vector<Belief<Scalar>>& out) {
    out[last] = steps[last].filtered;
    for (int i = last - 1; i >= first; --i) {
        const Belief<Scalar>& filt = steps[i].filtered;
        const Belief<Scalar>& pred_next = steps[i + 1].predicted;
        const MatrixX<Scalar> gain = filt.cov * psd_pinv(pred_next.cov);
        Belief<Scalar> sm;
        sm.n = filt.n;
        sm.mean = filt.mean + gain * (out[i + 1].mean - pred_next.mean);
        sm.cov = filt.cov + gain * (out[i + 1].cov - pred_next.cov) * gain.transpose();
        symmetrize(sm.cov);
        out[i] = std::move(sm);
    }
}

} // namespace detail

/// Rauch-Tung-Striebel smoother over a full filter result. The last smoothed
/// belief equals the last filtered belief.
template <typename Scalar>
std::vector<Belief<Scalar>> rts_smooth(const FilterResult<Scalar>& result) {
    if (result.steps.empty()) throw validation_error("cannot smooth an empty filter result");
    std::vector<Belief<Scalar>> out(result.steps.size());
    detail::rts_backward(result.steps, 0, static_cast<int>(result.steps.size()) - 1, out);
    return out;
}

/// Fixed-lag ("delayed") smoother: the estimate for step i conditions on
/// data through step i + depth, equivalently RTS on the series truncated
/// there. depth = 0 reproduces the filter; depth >= N reproduces full RTS.
template <typename Scalar>
std::vector<Belief<Scalar>> fixed_lag_smooth(const FilterResult<Scalar>& result, int depth) {
    if (depth < 0) throw validation_error("fixed-lag depth must be >= 0");
    if (result.steps.empty()) throw validation_error("cannot smooth an empty filter result");
    const int last = static_cast<int>(result.steps.size()) - 1;
    std::vector<Belief<Scalar>> out(result.steps.size());
    std::vector<Belief<Scalar>> window(result.steps.size());
    for (int i = 0; i <= last; ++i) {
        const int end = std::min(i + depth, last);
        detail::rts_backward(result.steps, i, end, window);
        out[i] = window[i];
    }
    return out;
}

template <typename Scalar>
std::vector<Belief<Scalar>> fixed_lag_smooth(const ObservationSeries<Scalar>& series,
                                             const StateLayout& layout,
                                             const NoiseConfig<Scalar>& noise, int depth) {
    return fixed_lag_smooth(filter_pass(series, layout, noise), depth);
}

template <typename Scalar = double>
struct InnovationDiagnostics {
    MatrixX<Scalar> autocorrelation; // channels x max_lag, lags 1..max_lag
    Scalar mean_nis = Scalar(0);     // expected ~ G for a consistent filter
    int steps = 0;
};

/// Filter-consistency check over the updated steps: per-channel innovation
/// sample autocorrelations and the mean normalized innovation squared.
template <typename Scalar>
InnovationDiagnostics<Scalar> innovation_diagnostics(const FilterResult<Scalar>& result,
                                                     int max_lag) {
    if (max_lag < 1) throw validation_error("max_lag must be positive");
    std::vector<const FilterStep<Scalar>*> upd;
    for (const auto& s : result.steps)
        if (s.updated) upd.push_back(&s);
    const int n = static_cast<int>(upd.size());
    if (n < 10 * max_lag)
        throw validation_error("too few updated steps for innovation diagnostics: " +
                               std::to_string(n));

    const int g = result.channels;
    InnovationDiagnostics<Scalar> diag;
    diag.steps = n;
    diag.autocorrelation = MatrixX<Scalar>::Zero(g, max_lag);

    MatrixX<Scalar> innov(n, g);
    for (int i = 0; i < n; ++i) innov.row(i) = upd[i]->innovation.transpose();
    const RowVectorX<Scalar> mean = innov.colwise().mean();
    innov.rowwise() -= mean;
    const RowVectorX<Scalar> denom = innov.colwise().squaredNorm();
    for (int lag = 1; lag <= max_lag; ++lag)
        for (int c = 0; c < g; ++c) {
            const Scalar num =
                innov.col(c).head(n - lag).dot(innov.col(c).tail(n - lag));
            diag.autocorrelation(c, lag - 1) = denom[c] > Scalar(0) ? num / denom[c] : Scalar(0);
        }

    Scalar nis_sum = Scalar(0);
    for (const auto* s : upd) {
        Eigen::LDLT<MatrixX<Scalar>> ldlt(s->innovation_cov);
        nis_sum += s->innovation.dot(ldlt.solve(s->innovation));
    }
    diag.mean_nis = nis_sum / Scalar(n);
    return diag;
}

template <typename Scalar = double>
struct TuneEntry {
    Scalar q = Scalar(0);
    Scalar r = Scalar(0);
    Scalar loglik = Scalar(0);
};

template <typename Scalar = double>
struct TuneResult {
    NoiseConfig<Scalar> best;
    std::vector<TuneEntry<Scalar>> table; // grid order: q-major, then r
};

/// Grid search over (q, r) by total innovation log-likelihood.
template <typename Scalar>
TuneResult<Scalar> tune_noise(const ObservationSeries<Scalar>& series, const StateLayout& layout,
                              const std::vector<Scalar>& q_grid, const std::vector<Scalar>& r_grid,
                              Scalar p0) {
    if (q_grid.empty() || r_grid.empty()) throw validation_error("noise grids must be non-empty");
    TuneResult<Scalar> out;
    bool have_best = false;
    Scalar best_ll = Scalar(0);
    for (const Scalar q : q_grid)
        for (const Scalar r : r_grid) {
            NoiseConfig<Scalar> cfg;
            cfg.q = q;
            cfg.r = r;
            cfg.p0 = p0;
            Scalar ll;
            try {
                ll = filter_pass(series, layout, cfg).total_loglik;
            } catch (const std::exception& e) {
                throw numerical_error("filter failed at grid point q=" + std::to_string(q) +
                                      " r=" + std::to_string(r) + ": " + e.what());
            }
            out.table.push_back({q, r, ll});
            if (!have_best || ll > best_ll) {
                out.best = cfg;
                best_ll = ll;
                have_best = true;
            }
        }
    return out;
}

} // namespace cdt

#endif
