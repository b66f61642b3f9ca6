#ifndef CDT_SVAR_HPP
#define CDT_SVAR_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/layout.hpp"
#include "cdt/series.hpp"

namespace cdt {

enum class ScheduleKind { constant, step, ramp };

/// Time profile of the true coefficients. step switches from base to step_to
/// at step_index; ramp interpolates linearly from base to ramp_to over
/// [ramp_start, ramp_end].
template <typename Scalar = double>
struct CoefficientSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    CausalFactors<Scalar> base;
    int step_index = 0;
    CausalFactors<Scalar> step_to;
    CausalFactors<Scalar> ramp_to;
    int ramp_start = 0;
    int ramp_end = 0;

    static CoefficientSchedule constant(CausalFactors<Scalar> factors) {
        CoefficientSchedule s;
        s.base = std::move(factors);
        return s;
    }

    CausalFactors<Scalar> factors_at(int n) const {
        switch (kind) {
        case ScheduleKind::constant:
            return base;
        case ScheduleKind::step:
            return n < step_index ? base : step_to;
        case ScheduleKind::ramp: {
            if (n <= ramp_start) return base;
            if (n >= ramp_end) return ramp_to;
            const Scalar t = Scalar(n - ramp_start) / Scalar(ramp_end - ramp_start);
            CausalFactors<Scalar> f;
            f.a0 = (Scalar(1) - t) * base.a0 + t * ramp_to.a0;
            f.a1 = (Scalar(1) - t) * base.a1 + t * ramp_to.a1;
            return f;
        }
        }
        throw validation_error("unknown schedule kind");
    }

    void check(int n_samples) const {
        const int g = base.nodes();
        auto check_factors = [&](const CausalFactors<Scalar>& f, const char* name) {
            if (f.nodes() != g || f.a1.rows() != g || f.a1.cols() != g ||
                f.a0.cols() != g)
                throw validation_error(std::string(name) + " factor matrices must all be GxG");
            detail::require_zero_diagonal(f.a0, name);
            detail::require_zero_diagonal(f.a1, name);
        };
        check_factors(base, "base");
        if (kind == ScheduleKind::step) {
            check_factors(step_to, "step_to");
            if (step_index <= 0 || step_index >= n_samples)
                throw validation_error("step index must lie strictly inside the series");
        } else if (kind == ScheduleKind::ramp) {
            check_factors(ramp_to, "ramp_to");
            if (ramp_start < 0 || ramp_start >= ramp_end || ramp_end >= n_samples)
                throw validation_error("ramp interval must satisfy 0 <= start < end < N");
        }
    }
};

enum class NoiseKind { gaussian, laplace };

/// Ground-truth simulator configuration. burn_in < 0 means automatic:
/// 100 discarded samples for constant schedules, 0 otherwise.
template <typename Scalar = double>
struct SvarSpec {
    CoefficientSchedule<Scalar> schedule;
    NoiseKind noise_kind = NoiseKind::gaussian;
    Scalar noise_scale = Scalar(1);
    int n_samples = 0;
    std::uint64_t seed = 0;
    VectorX<Scalar> y_init;
    int burn_in = -1;

    int effective_burn_in() const {
        if (burn_in >= 0) return burn_in;
        return schedule.kind == ScheduleKind::constant ? 100 : 0;
    }

    void check() const {
        if (n_samples < 2) throw validation_error("simulation needs at least 2 samples");
        if (!(noise_scale > Scalar(0))) throw validation_error("noise scale must be > 0");
        schedule.check(n_samples);
        const int g = schedule.base.nodes();
        if (y_init.size() != 0 && y_init.size() != g)
            throw validation_error("y_init length does not match node count");
    }
};

/// B = (I - A0)^{-1} A1, the lag-1 matrix of the equivalent reduced-form VAR.
template <typename Scalar>
MatrixX<Scalar> reduced_form(const CausalFactors<Scalar>& factors) {
    const int g = factors.nodes();
    const MatrixX<Scalar> m = MatrixX<Scalar>::Identity(g, g) - factors.a0;
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv.minCoeff() > Scalar(0)) || sv.maxCoeff() / sv.minCoeff() >= Scalar(1e12))
        throw numerical_error("I - A0 is singular or ill-conditioned");
    return svd.solve(factors.a1);
}

template <typename Scalar>
Scalar spectral_radius(const MatrixX<Scalar>& m) {
    Eigen::EigenSolver<MatrixX<Scalar>> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Scalar = double>
struct ScheduleFailure {
    int index = 0;
    std::string reason;
};

template <typename Scalar = double>
struct ValidationReport {
    bool ok = true;
    std::vector<ScheduleFailure<Scalar>> failures;
};

/// Checks every scheduled coefficient value for invertibility of I - A0 and
/// spectral radius of the reduced form strictly below 1.
template <typename Scalar>
ValidationReport<Scalar> validate(const SvarSpec<Scalar>& spec) {
    spec.check();
    ValidationReport<Scalar> report;
    CausalFactors<Scalar> prev;
    for (int n = 0; n < spec.n_samples; ++n) {
        CausalFactors<Scalar> f = spec.schedule.factors_at(n);
        if (n > 0 && f.a0.cwiseEqual(prev.a0).all() && f.a1.cwiseEqual(prev.a1).all()) continue;
        prev = f;
        try {
            const Scalar rho = spectral_radius(reduced_form(f));
            if (!(rho < Scalar(1))) {
                report.ok = false;
                report.failures.push_back(
                    {n, "spectral radius " + std::to_string(rho) + " is not < 1"});
            }
        } catch (const std::exception& e) {
            report.ok = false;
            report.failures.push_back({n, e.what()});
        }
    }
    return report;
}

/// Deterministic, portable random source: raw mt19937_64 output mapped to
/// uniforms, Gaussians via Box-Muller, Laplace via inverse CDF. Avoids
/// std::normal_distribution, whose output differs across standard libraries.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; } // [0, 1)

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Unit-variance Laplace draw.
    double laplace() {
        const double u = uniform() - 0.5;
        const double b = 1.0 / std::numbers::sqrt2; // scale for unit variance
        return -b * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0;
    bool have_spare_ = false;
};

template <typename Scalar = double>
struct SimResult {
    ObservationSeries<Scalar> series;
    std::vector<CausalFactors<Scalar>> truth; // one per returned sample
    MatrixX<Scalar> noise;                    // structural noise draws, N x G
};

/// Generates the series via the reduced form, y_t = B y_{t-1} + (I-A0)^{-1} e_t,
/// which satisfies the structural equation exactly. Burn-in samples are
/// simulated with the factors at schedule index 0 and discarded.
template <typename Scalar>
SimResult<Scalar> simulate(const SvarSpec<Scalar>& spec) {
    const auto report = validate(spec);
    if (!report.ok)
        throw validation_error("unstable simulation spec at schedule index " +
                               std::to_string(report.failures.front().index) + ": " +
                               report.failures.front().reason);

    const int g = spec.schedule.base.nodes();
    const int n_out = spec.n_samples;
    const int burn = spec.effective_burn_in();
    SimRng rng(spec.seed);

    SimResult<Scalar> result;
    MatrixX<Scalar> values(n_out, g);
    result.noise.resize(n_out, g);
    result.truth.reserve(n_out);

    VectorX<Scalar> y_prev =
        spec.y_init.size() ? spec.y_init : VectorX<Scalar>::Zero(g);
    CausalFactors<Scalar> current;
    MatrixX<Scalar> b;
    Eigen::PartialPivLU<MatrixX<Scalar>> structural_lu;
    bool have_coeffs = false;

    for (int t = 0; t < burn + n_out; ++t) {
        const int idx = std::clamp(t - burn, 0, n_out - 1);
        CausalFactors<Scalar> f = spec.schedule.factors_at(idx);
        if (!have_coeffs || !f.a0.cwiseEqual(current.a0).all() ||
            !f.a1.cwiseEqual(current.a1).all()) {
            current = f;
            structural_lu.compute(MatrixX<Scalar>::Identity(g, g) - current.a0);
            b = structural_lu.solve(current.a1);
            have_coeffs = true;
        }
        VectorX<Scalar> e(g);
        for (int c = 0; c < g; ++c)
            e[c] = spec.noise_scale *
                   (spec.noise_kind == NoiseKind::gaussian ? rng.gaussian() : rng.laplace());
        const VectorX<Scalar> y = b * y_prev + structural_lu.solve(e);
        if (t >= burn) {
            values.row(t - burn) = y.transpose();
            result.noise.row(t - burn) = e.transpose();
            result.truth.push_back(current);
        }
        y_prev = y;
    }

    result.series = ObservationSeries<Scalar>::contiguous(std::move(values));
    return result;
}

} // namespace cdt

#endif
