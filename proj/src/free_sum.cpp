#include "rmtspec/free_sum.hpp"

#include <cmath>
#include <limits>

namespace rmtspec {
namespace {

using cplx = std::complex<double>;

cplx meas_g(const SpectralMeasure& m, cplx u) {
    cplx s = 0.0;
    for (const Atom& a : m.atoms()) s += a.weight / (a.location - u);
    return s;
}

cplx meas_gp(const SpectralMeasure& m, cplx u) {
    cplx s = 0.0;
    for (const Atom& a : m.atoms()) {
        cplx d = a.location - u;
        s += a.weight / (d * d);
    }
    return s;
}

void check_inputs(const std::vector<SpectralMeasure>& measures) {
    if (measures.empty()) throw InvalidMeasure("at least one summand measure is required");
    for (const SpectralMeasure& m : measures) {
        if (m.support_bound() == 0.0)
            throw DegenerateMeasure("summand measure has all mass at zero");
    }
}

// Residual of the coupled system in the auxiliary variables omega_j = -1/rho_j:
// each G_j(omega_j) must equal (J-1)/(z - sum omega).
double residual_at(const std::vector<SpectralMeasure>& ms, cplx z, const std::vector<cplx>& om,
                   cplx& g_out) {
    std::size_t j_count = ms.size();
    cplx den = z;
    for (cplx o : om) den -= o;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    cplx g = static_cast<double>(j_count - 1) / den;
    double res = 0.0;
    for (std::size_t j = 0; j < j_count; ++j)
        res = std::max(res, std::abs(g - meas_g(ms[j], om[j])));
    g_out = g;
    return res;
}

SumFixedPointState solve_sum_from(const std::vector<SpectralMeasure>& ms, cplx z,
                                  const SolverConfig& cfg, const std::vector<cplx>* warm_rho) {
    std::size_t j_count = ms.size();
    SumFixedPointState st;
    if (j_count == 1) {
        st.g = meas_g(ms[0], z);
        st.rho = {-1.0 / z};
        st.residual = 0.0;
        st.iterations = 0;
        st.converged = true;
        return st;
    }

    std::vector<cplx> om(j_count, cplx(0.0, 1.0));
    if (warm_rho && warm_rho->size() == j_count) {
        bool ok = true;
        for (std::size_t j = 0; j < j_count; ++j) {
            cplx o = -1.0 / (*warm_rho)[j];
            if (!(o.imag() > 0.0)) {
                ok = false;
                break;
            }
            om[j] = o;
        }
        if (!ok) om.assign(j_count, cplx(0.0, 1.0));
    }

    cplx g = 0.0;
    double res = residual_at(ms, z, om, g);
    int it = 0;
    bool newton_ok = false;
    std::vector<cplx> h(j_count), f(j_count), diag(j_count), delta(j_count), cand(j_count);
    while (it < cfg.max_iterations && res > cfg.tolerance) {
        ++it;
        if (!newton_ok) {
            // relaxed subordination sweep; h_k has nonnegative imaginary part,
            // so every target and every convex step stays in the half-plane
            for (std::size_t k = 0; k < j_count; ++k) h[k] = -1.0 / meas_g(ms[k], om[k]) - om[k];
            for (std::size_t j = 0; j < j_count; ++j) {
                cplx tgt = z;
                for (std::size_t k = 0; k < j_count; ++k)
                    if (k != j) tgt += h[k];
                om[j] += cfg.damping * (tgt - om[j]);
                h[j] = -1.0 / meas_g(ms[j], om[j]) - om[j];
            }
            res = residual_at(ms, z, om, g);
            if (res < 1e-3) newton_ok = true;
        } else {
            // Newton on f_j = G_j(omega_j) - (J-1)/(z - sum omega); the
            // Jacobian is diagonal plus rank one, solved by Sherman-Morrison
            cplx s = z;
            for (cplx o : om) s -= o;
            cplx cc = -static_cast<double>(j_count - 1) / (s * s);
            for (std::size_t j = 0; j < j_count; ++j) {
                diag[j] = meas_gp(ms[j], om[j]);
                f[j] = meas_g(ms[j], om[j]) - static_cast<double>(j_count - 1) / s;
            }
            cplx sum_df = 0.0, sum_d1 = 0.0;
            for (std::size_t j = 0; j < j_count; ++j) {
                sum_df += f[j] / diag[j];
                sum_d1 += 1.0 / diag[j];
            }
            cplx corr = cc * sum_df / (1.0 + cc * sum_d1);
            for (std::size_t j = 0; j < j_count; ++j) delta[j] = -(f[j] / diag[j] - corr / diag[j]);

            double d = 1.0;
            bool improved = false;
            for (int halving = 0; halving < 61; ++halving) {
                bool admissible = true;
                for (std::size_t j = 0; j < j_count; ++j) {
                    cand[j] = om[j] + d * delta[j];
                    if (!(cand[j].imag() > 0.0)) {
                        admissible = false;
                        break;
                    }
                }
                if (admissible) {
                    cplx gc = 0.0;
                    double nr = residual_at(ms, z, cand, gc);
                    if (nr < res) {
                        om = cand;
                        res = nr;
                        g = gc;
                        improved = true;
                        break;
                    }
                }
                d *= 0.5;
            }
            if (!improved) newton_ok = false;
        }
    }

    st.g = g;
    st.rho.resize(j_count);
    for (std::size_t j = 0; j < j_count; ++j) st.rho[j] = -1.0 / om[j];
    st.residual = res;
    st.iterations = it;
    st.converged = res <= cfg.tolerance && g.imag() > 0.0;
    for (const cplx& r : st.rho)
        if (!(r.imag() > 0.0)) st.converged = false;
    return st;
}

}  // namespace

SumFixedPointState solve_sum(const std::vector<SpectralMeasure>& measures, HalfPlanePoint z,
                             const SolverConfig& cfg) {
    validate(cfg);
    check_inputs(measures);
    SumFixedPointState st = solve_sum_from(measures, z.value(), cfg, nullptr);
    if (!st.converged) throw NonConvergence("sum solver did not reach the tolerance");
    if (cfg.check_ambiguity && measures.size() > 1) {
        std::vector<cplx> alt_rho(measures.size(), cplx(0.0, 2.0));
        SumFixedPointState st2 = solve_sum_from(measures, z.value(), cfg, &alt_rho);
        if (st2.converged) {
            double diff = std::abs(st.g - st2.g);
            for (std::size_t j = 0; j < st.rho.size(); ++j)
                diff = std::max(diff, std::abs(st.rho[j] - st2.rho[j]));
            if (diff > 100.0 * cfg.tolerance)
                throw AmbiguousFixedPoint("two admissible starts reached different states");
        }
    }
    return st;
}

std::vector<SumFixedPointState> solve_sum_grid(const std::vector<SpectralMeasure>& measures,
                                               const std::vector<HalfPlanePoint>& z_grid,
                                               const SolverConfig& cfg) {
    validate(cfg);
    check_inputs(measures);
    std::vector<SumFixedPointState> states;
    states.reserve(z_grid.size());
    const std::vector<cplx>* warm = nullptr;
    for (const HalfPlanePoint& z : z_grid) {
        SumFixedPointState st = solve_sum_from(measures, z.value(), cfg, warm);
        if (!st.converged && warm != nullptr) {
            // a stale warm start can strand the iteration; retry cold
            st = solve_sum_from(measures, z.value(), cfg, nullptr);
        }
        states.push_back(std::move(st));
        warm = states.back().converged ? &states.back().rho : nullptr;
    }
    return states;
}

}  // namespace rmtspec
