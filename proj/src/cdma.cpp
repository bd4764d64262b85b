#include "rmtspec/cdma.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace rmtspec {

std::string to_string(SignatureKind kind) {
    return kind == SignatureKind::iid ? "iid" : "isometric";
}

SignatureKind signature_kind_from_string(const std::string& s) {
    if (s == "iid") return SignatureKind::iid;
    if (s == "isometric") return SignatureKind::isometric;
    throw InvalidScenario("unknown signature kind: " + s);
}

void validate(const CdmaScenario& scenario) {
    if (scenario.transmitters.empty())
        throw InvalidScenario("scenario needs at least one transmitter");
    for (const TransmitterSpec& t : scenario.transmitters) {
        if (!(t.alpha > 0.0) || !std::isfinite(t.alpha))
            throw InvalidScenario("transmitter alpha must be positive");
        if (t.kind == SignatureKind::isometric && t.alpha > 1.0)
            throw InvalidScenario("isometric requires alpha <= 1");
        if (t.power.min_location() < 0.0)
            throw InvalidScenario("power measures must be supported on [0, inf)");
        if (t.power.support_bound() == 0.0)
            throw DegenerateMeasure("power measure has all mass at zero");
    }
    if (scenario.channel.dimension() != scenario.transmitters.size())
        throw InvalidScenario("channel dimension must match the transmitter count");
    for (std::size_t j = 0; j < scenario.transmitters.size(); ++j) {
        if (scenario.channel.max_gain(j) == 0.0)
            throw DegenerateMeasure("channel marginal has all mass at zero");
    }
    if (!(scenario.noise_variance >= 0.0) || !std::isfinite(scenario.noise_variance))
        throw InvalidScenario("noise variance must be nonnegative");
}

std::complex<double> eval_calP(const SpectralMeasure& power, std::complex<double> rho) {
    std::complex<double> s = 0.0;
    for (const Atom& a : power.atoms()) {
        std::complex<double> den = 1.0 + a.location * rho;
        if (den == 0.0) throw EvaluationPole("rho places a pole on a power atom");
        s += a.weight * a.location / den;
    }
    return s;
}

std::complex<double> eval_calH(const JointChannelMeasure& channel, std::size_t j,
                               const std::vector<std::complex<double>>& weights,
                               std::complex<double> z) {
    if (weights.size() != channel.dimension())
        throw InvalidDimensions("one weight per channel dimension is required");
    if (j >= channel.dimension()) throw InvalidDimensions("transmitter index out of range");
    std::complex<double> s = 0.0;
    for (const JointAtom& a : channel.atoms()) {
        std::complex<double> den = -z;
        for (std::size_t i = 0; i < weights.size(); ++i) den += weights[i] * a.h[i];
        if (den == 0.0) throw EvaluationPole("weights place a pole on a channel atom");
        s += a.weight * a.h[j] / den;
    }
    return s;
}

namespace {

using cplx = std::complex<double>;

constexpr int kRungBudget = 400;
constexpr int kMaxSubdivisions = 60;

std::vector<cplx> quad_roots(cplx a, cplx b, cplx c) {
    if (a == 0.0) return {-c / b};
    cplx disc = std::sqrt(b * b - 4.0 * a * c);
    // pick the sign that avoids cancellation, then pair the roots through the
    // product c/a so both stay accurate
    cplx qq = (std::conj(b) * disc).real() >= 0.0 ? -(b + disc) / 2.0 : -(b - disc) / 2.0;
    if (qq == 0.0) return {cplx(0.0), cplx(0.0)};
    return {qq / a, c / qq};
}

struct IterationOutcome {
    double residual = 0.0;
    cplx g;
    int iterations = 0;
};

class Theorem1System {
public:
    Theorem1System(const CdmaScenario& sc, const SolverConfig& cfg)
        : cfg_(cfg), j_count_(sc.transmitters.size()) {
        for (const TransmitterSpec& t : sc.transmitters) {
            al_.push_back(t.alpha);
            kinds_.push_back(t.kind);
            powers_.push_back(&t.power);
            pbar_.push_back(t.power.mean());
        }
        natoms_ = sc.channel.size();
        h_.resize(natoms_ * j_count_);
        w_.resize(natoms_);
        for (std::size_t a = 0; a < natoms_; ++a) {
            const JointAtom& atom = sc.channel.atoms()[a];
            w_[a] = atom.weight;
            for (std::size_t j = 0; j < j_count_; ++j) h_[a * j_count_ + j] = atom.h[j];
        }
        den_.resize(natoms_);
    }

    CdmaFixedPointState solve(cplx z, cplx init) {
        std::vector<cplx> rho(j_count_, init), tau(j_count_, init);
        bool all_iid = std::all_of(kinds_.begin(), kinds_.end(),
                                   [](SignatureKind k) { return k == SignatureKind::iid; });
        std::optional<IterationOutcome> out;
        if (all_iid) {
            out = converge_at(z, rho, tau, cfg_.tolerance, cfg_.max_iterations, false, false);
            if (!out) {
                std::fill(rho.begin(), rho.end(), init);
                std::fill(tau.begin(), tau.end(), init);
                out = homotopy_solve(z, rho, tau);
            }
        } else {
            out = homotopy_solve(z, rho, tau);
        }
        return package(z, rho, tau, out);
    }

    CdmaFixedPointState solve_from(cplx z, const CdmaFixedPointState& warm, cplx init) {
        std::vector<cplx> rho = warm.rho, tau = warm.tau;
        bool admissible = rho.size() == j_count_ && tau.size() == j_count_;
        for (std::size_t j = 0; admissible && j < j_count_; ++j)
            admissible = rho[j].imag() > 0.0 && tau[j].imag() > 0.0;
        if (admissible) {
            auto out = converge_at(z, rho, tau, cfg_.tolerance, cfg_.max_iterations, true, false);
            if (out) return package(z, rho, tau, out);
        }
        return solve(z, init);
    }

private:
    void channel_denominators(const std::vector<cplx>& tau, cplx z) {
        // den_a = -z + sum_i (alpha_i pbar_i - tau_i) h_{a,i}
        for (std::size_t a = 0; a < natoms_; ++a) {
            cplx d = -z;
            const double* ha = &h_[a * j_count_];
            for (std::size_t i = 0; i < j_count_; ++i) d += (al_[i] * pbar_[i] - tau[i]) * ha[i];
            den_[a] = d;
        }
    }

    std::vector<cplx> calH_all(const std::vector<cplx>& tau, cplx z) {
        channel_denominators(tau, z);
        std::vector<cplx> out(j_count_, 0.0);
        for (std::size_t a = 0; a < natoms_; ++a) {
            const double* ha = &h_[a * j_count_];
            cplx f = w_[a] / den_[a];
            for (std::size_t j = 0; j < j_count_; ++j) out[j] += f * ha[j];
        }
        return out;
    }

    cplx calH_one(const std::vector<cplx>& tau, cplx z, std::size_t j) {
        channel_denominators(tau, z);
        cplx s = 0.0;
        for (std::size_t a = 0; a < natoms_; ++a)
            s += w_[a] * h_[a * j_count_ + j] / den_[a];
        return s;
    }

    Eigen::MatrixXcd calM(const std::vector<cplx>& tau, cplx z) {
        channel_denominators(tau, z);
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(j_count_, j_count_);
        for (std::size_t a = 0; a < natoms_; ++a) {
            const double* ha = &h_[a * j_count_];
            cplx f = w_[a] / (den_[a] * den_[a]);
            for (std::size_t j = 0; j < j_count_; ++j)
                for (std::size_t i = j; i < j_count_; ++i) m(j, i) += f * ha[j] * ha[i];
        }
        for (std::size_t j = 0; j < j_count_; ++j)
            for (std::size_t i = 0; i < j; ++i) m(j, i) = m(i, j);
        return m;
    }

    static cplx calP(const SpectralMeasure& p, cplx rho) {
        cplx s = 0.0;
        for (const Atom& a : p.atoms()) s += a.weight * a.location / (1.0 + a.location * rho);
        return s;
    }

    static cplx calPp(const SpectralMeasure& p, cplx rho) {
        cplx s = 0.0;
        for (const Atom& a : p.atoms()) {
            cplx d = 1.0 + a.location * rho;
            s -= a.weight * a.location * a.location / (d * d);
        }
        return s;
    }

    double residual_at(const std::vector<cplx>& rho, const std::vector<cplx>& tau, cplx z,
                       cplx& g, std::vector<cplx>& ch, std::vector<cplx>& cp) {
        ch = calH_all(tau, z);
        cp.resize(j_count_);
        cplx acc = 0.0;
        for (std::size_t j = 0; j < j_count_; ++j) {
            cp[j] = calP(*powers_[j], rho[j]);
            acc += al_[j] * rho[j] * cp[j];
        }
        g = (-1.0 / z) * (1.0 - acc);
        double dev = 0.0;
        for (std::size_t j = 0; j < j_count_; ++j) {
            if (kinds_[j] == SignatureKind::iid) {
                dev = std::max(dev, std::abs(rho[j] - ch[j]));
                dev = std::max(dev, std::abs(tau[j] - al_[j] * (pbar_[j] - cp[j])));
            } else {
                dev = std::max(dev, std::abs(rho[j] * (1.0 - al_[j] * rho[j] * cp[j]) - ch[j]));
                cplx wj = al_[j] * pbar_[j] - tau[j];
                dev = std::max(dev,
                               std::abs(tau[j] - al_[j] * (pbar_[j] - cp[j]) + wj * wj * ch[j]));
            }
        }
        if (!std::isfinite(dev)) dev = std::numeric_limits<double>::infinity();
        return dev;
    }

    // one relaxed nonlinear Gauss-Seidel pass; isometric updates pick between
    // the two closed-form branch roots by their equation defect
    bool sweep(std::vector<cplx>& rho, std::vector<cplx>& tau, const std::vector<cplx>& ch,
               cplx z, double d) {
        for (std::size_t j = 0; j < j_count_; ++j) {
            if (kinds_[j] == SignatureKind::iid) {
                rho[j] += d * (ch[j] - rho[j]);
            } else {
                cplx cpj = calP(*powers_[j], rho[j]);
                std::optional<std::pair<double, cplx>> best;
                for (cplx r : quad_roots(al_[j] * cpj, cplx(-1.0), ch[j])) {
                    double dd = d;
                    bool ok = false;
                    cplx c;
                    for (int h = 0; h < 61; ++h) {
                        c = rho[j] + dd * (r - rho[j]);
                        if (c.imag() > 0.0) {
                            ok = true;
                            break;
                        }
                        dd *= 0.5;
                    }
                    if (!ok) continue;
                    double defect =
                        std::abs(c * (1.0 - al_[j] * c * calP(*powers_[j], c)) - ch[j]);
                    if (!best || defect < best->first) best = {defect, c};
                }
                if (!best) return false;
                rho[j] = best->second;
            }
        }
        for (std::size_t j = 0; j < j_count_; ++j) {
            cplx cpj = calP(*powers_[j], rho[j]);
            if (kinds_[j] == SignatureKind::iid) {
                cplx t = al_[j] * (pbar_[j] - cpj);
                tau[j] += d * (t - tau[j]);
            } else {
                cplx a = ch[j];
                cplx b = 1.0 - 2.0 * al_[j] * pbar_[j] * ch[j];
                cplx c0 = al_[j] * al_[j] * pbar_[j] * pbar_[j] * ch[j] -
                          al_[j] * (pbar_[j] - cpj);
                std::optional<std::pair<double, cplx>> best;
                for (cplx r : quad_roots(a, b, c0)) {
                    double dd = d;
                    bool ok = false;
                    cplx c;
                    for (int h = 0; h < 61; ++h) {
                        c = tau[j] + dd * (r - tau[j]);
                        if (c.imag() > 0.0) {
                            ok = true;
                            break;
                        }
                        dd *= 0.5;
                    }
                    if (!ok) continue;
                    std::vector<cplx> tt = tau;
                    tt[j] = c;
                    cplx hc = calH_one(tt, z, j);
                    cplx wj = al_[j] * pbar_[j] - c;
                    double defect = std::abs(c - al_[j] * (pbar_[j] - cpj) + wj * wj * hc);
                    if (!best || defect < best->first) best = {defect, c};
                }
                if (!best) return false;
                tau[j] = best->second;
            }
        }
        return true;
    }

    std::optional<Eigen::VectorXcd> newton_delta(const std::vector<cplx>& rho,
                                                 const std::vector<cplx>& tau,
                                                 const std::vector<cplx>& ch,
                                                 const std::vector<cplx>& cp, cplx z) {
        std::size_t n = 2 * j_count_;
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
        Eigen::VectorXcd f(n);
        Eigen::MatrixXcd m = calM(tau, z);
        for (std::size_t j = 0; j < j_count_; ++j) {
            cplx pp = calPp(*powers_[j], rho[j]);
            if (kinds_[j] == SignatureKind::iid) {
                f(j) = rho[j] - ch[j];
                a(j, j) = 1.0;
                for (std::size_t i = 0; i < j_count_; ++i) a(j, j_count_ + i) = -m(j, i);
                f(j_count_ + j) = tau[j] - al_[j] * (pbar_[j] - cp[j]);
                a(j_count_ + j, j) = al_[j] * pp;
                a(j_count_ + j, j_count_ + j) = 1.0;
            } else {
                f(j) = rho[j] * (1.0 - al_[j] * rho[j] * cp[j]) - ch[j];
                a(j, j) = 1.0 - al_[j] * (2.0 * rho[j] * cp[j] + rho[j] * rho[j] * pp);
                for (std::size_t i = 0; i < j_count_; ++i) a(j, j_count_ + i) = -m(j, i);
                cplx wj = al_[j] * pbar_[j] - tau[j];
                f(j_count_ + j) = tau[j] - al_[j] * (pbar_[j] - cp[j]) + wj * wj * ch[j];
                a(j_count_ + j, j) = al_[j] * pp;
                for (std::size_t i = 0; i < j_count_; ++i)
                    a(j_count_ + j, j_count_ + i) = wj * wj * m(j, i);
                a(j_count_ + j, j_count_ + j) += 1.0 - 2.0 * wj * ch[j];
            }
        }
        Eigen::VectorXcd dx = a.partialPivLu().solve(-f);
        if (!dx.allFinite()) return std::nullopt;
        return dx;
    }

    std::optional<IterationOutcome> converge_at(cplx z, std::vector<cplx>& rho,
                                                std::vector<cplx>& tau, double tol, int budget,
                                                bool newton_first, bool scaled) {
        cplx g;
        std::vector<cplx> ch, cp;
        double res = residual_at(rho, tau, z, g, ch, cp);
        double d = cfg_.damping;
        double best_res = res;
        int stall = 0;
        int it = 0;
        auto eff_tol = [&]() {
            if (!scaled) return tol;
            double m = 1.0;
            for (std::size_t j = 0; j < j_count_; ++j)
                m = std::max({m, std::abs(rho[j]), std::abs(tau[j])});
            return tol * m;
        };
        std::vector<cplx> cr(j_count_), ct(j_count_), ch2, cp2;
        while (it < budget && res > eff_tol()) {
            ++it;
            bool stepped = false;
            if (newton_first || res < 1e-3) {
                auto dx = newton_delta(rho, tau, ch, cp, z);
                if (dx) {
                    double t = 1.0;
                    for (int h = 0; h < 40; ++h) {
                        bool admissible = true;
                        for (std::size_t j = 0; j < j_count_; ++j) {
                            cr[j] = rho[j] + t * (*dx)(j);
                            ct[j] = tau[j] + t * (*dx)(j_count_ + j);
                            if (!(cr[j].imag() > 0.0) || !(ct[j].imag() > 0.0)) {
                                admissible = false;
                                break;
                            }
                        }
                        if (admissible) {
                            cplx g2;
                            double r2 = residual_at(cr, ct, z, g2, ch2, cp2);
                            if (r2 < res) {
                                rho = cr;
                                tau = ct;
                                res = r2;
                                g = g2;
                                ch = ch2;
                                cp = cp2;
                                stepped = true;
                                break;
                            }
                        }
                        t *= 0.5;
                    }
                }
            }
            if (!stepped) {
                if (!sweep(rho, tau, ch, z, d)) return std::nullopt;
                res = residual_at(rho, tau, z, g, ch, cp);
            }
            if (res < best_res * 0.999) {
                best_res = res;
                stall = 0;
            } else if (++stall >= 8) {
                d = std::max(d * 0.5, 1.0 / 64.0);
                stall = 0;
            }
        }
        if (res > eff_tol()) return std::nullopt;
        return IterationOutcome{res, g, it};
    }

    // continuation in the imaginary part: solve high above the axis where the
    // relaxed sweep is a contraction, then track the branch down a halving
    // ladder with Newton steps, geometrically subdividing any rung that fails
    std::optional<IterationOutcome> homotopy_solve(cplx z, std::vector<cplx>& rho,
                                                   std::vector<cplx>& tau) {
        double t0 = std::max(4.0 * (1.0 + std::abs(z)), 8.0);
        if (z.imag() >= t0)
            return converge_at(z, rho, tau, cfg_.tolerance, cfg_.max_iterations, false, false);
        cplx zt(z.real(), t0);
        auto out = converge_at(zt, rho, tau, 1e-9, cfg_.max_iterations, false, true);
        if (!out) return std::nullopt;
        int total = out->iterations;
        double t_cur = t0;
        std::vector<double> ladder;
        for (double t = t0; t > z.imag() * 1.000000001;) {
            t = std::max(t / 2.0, z.imag());
            ladder.push_back(t);
        }
        std::reverse(ladder.begin(), ladder.end());
        int subdiv = 0;
        IterationOutcome last = *out;
        while (!ladder.empty()) {
            double t = ladder.back();
            ladder.pop_back();
            bool final = t == z.imag();
            cplx zr(z.real(), t);
            std::vector<cplx> rho_try = rho, tau_try = tau;
            auto rung = converge_at(zr, rho_try, tau_try, final ? cfg_.tolerance : 1e-9,
                                    kRungBudget, true, !final);
            if (!rung) {
                if (++subdiv > kMaxSubdivisions) return std::nullopt;
                ladder.push_back(t);
                ladder.push_back(std::sqrt(t_cur * t));
                continue;
            }
            rho = rho_try;
            tau = tau_try;
            total += rung->iterations;
            t_cur = t;
            last = *rung;
            if (total > cfg_.max_iterations * 10) return std::nullopt;
        }
        last.iterations = total;
        return last;
    }

    CdmaFixedPointState package(cplx z, const std::vector<cplx>& rho,
                                const std::vector<cplx>& tau,
                                const std::optional<IterationOutcome>& out) {
        CdmaFixedPointState st;
        st.rho = rho;
        st.tau = tau;
        st.pbar = pbar_;
        st.calH = calH_all(tau, z);
        st.calP.resize(j_count_);
        for (std::size_t j = 0; j < j_count_; ++j) st.calP[j] = calP(*powers_[j], rho[j]);
        if (out) {
            st.g = out->g;
            st.residual = out->residual;
            st.iterations = out->iterations;
            st.converged = st.g.imag() > 0.0;
            for (std::size_t j = 0; j < j_count_; ++j) {
                if (!(rho[j].imag() > 0.0) || !(tau[j].imag() > 0.0)) st.converged = false;
            }
        } else {
            cplx g;
            std::vector<cplx> ch, cp;
            st.residual = residual_at(rho, tau, z, g, ch, cp);
            st.g = g;
            st.iterations = cfg_.max_iterations;
            st.converged = false;
        }
        return st;
    }

    SolverConfig cfg_;
    std::size_t j_count_;
    std::vector<double> al_, pbar_;
    std::vector<SignatureKind> kinds_;
    std::vector<const SpectralMeasure*> powers_;
    std::size_t natoms_ = 0;
    std::vector<double> h_, w_;
    std::vector<cplx> den_;
};

CdmaFixedPointState solve_checked(const CdmaScenario& scenario, cplx z, const SolverConfig& cfg) {
    Theorem1System sys(scenario, cfg);
    CdmaFixedPointState st = sys.solve(z, cplx(0.0, 1.0));
    if (!st.converged) throw NonConvergence("fixed-point solver did not reach the tolerance");
    if (cfg.check_ambiguity) {
        CdmaFixedPointState st2 = sys.solve(z, cplx(0.0, 2.0));
        if (st2.converged) {
            double diff = std::abs(st.g - st2.g);
            for (std::size_t j = 0; j < st.rho.size(); ++j) {
                diff = std::max(diff, std::abs(st.rho[j] - st2.rho[j]));
                diff = std::max(diff, std::abs(st.tau[j] - st2.tau[j]));
            }
            if (diff > 100.0 * cfg.tolerance)
                throw AmbiguousFixedPoint("two admissible starts reached different states");
        }
    }
    return st;
}

}  // namespace

CdmaFixedPointState solve_theorem1(const CdmaScenario& scenario, HalfPlanePoint z,
                                   const SolverConfig& cfg) {
    validate(cfg);
    validate(scenario);
    return solve_checked(scenario, z.value(), cfg);
}

namespace {

// Off the spectrum, Im rho scales like epsilon * |rho|^2 (resolvent
// sensitivity); at a spectral edge it stays comparable to |rho| as epsilon
// shrinks.  The ratio of the two separates the cases by orders of magnitude.
bool touches_spectrum(cplx rho, double epsilon) {
    return std::abs(rho.imag()) >= 1e3 * epsilon * (1.0 + std::norm(rho));
}

}  // namespace

double sinr(const CdmaScenario& scenario, double power_level, std::size_t j, double epsilon,
            const SolverConfig& cfg) {
    validate(cfg);
    validate(scenario);
    if (j >= scenario.transmitters.size())
        throw InvalidDimensions("transmitter index out of range");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidGrid("epsilon must be positive");
    const SpectralMeasure& power = scenario.transmitters[j].power;
    if (power_level < power.min_location() || power_level > power.max_location()) {
        std::cerr << "warning: power level " << power_level
                  << " lies outside the support of the transmitter power measure\n";
    }
    CdmaFixedPointState st =
        solve_checked(scenario, cplx(-scenario.noise_variance, epsilon), cfg);
    if (touches_spectrum(st.rho[j], epsilon))
        throw SpectralEdge("evaluation point touches the spectrum; shrink epsilon");
    return power_level * st.rho[j].real();
}

std::vector<SinrRow> sinr_sweep(const CdmaScenario& scenario, const std::vector<double>& snr_db,
                                const SolverConfig& cfg) {
    validate(cfg);
    validate(scenario);
    constexpr double epsilon = 1e-8;
    std::vector<SinrRow> rows;
    rows.reserve(snr_db.size() * scenario.transmitters.size());
    CdmaScenario working = scenario;
    std::optional<CdmaFixedPointState> warm;
    for (double snr : snr_db) {
        working.noise_variance = std::pow(10.0, -snr / 10.0);
        Theorem1System sys(working, cfg);
        cplx z(-working.noise_variance, epsilon);
        CdmaFixedPointState st =
            warm ? sys.solve_from(z, *warm, cplx(0.0, 1.0)) : sys.solve(z, cplx(0.0, 1.0));
        for (std::size_t j = 0; j < scenario.transmitters.size(); ++j) {
            SinrRow row;
            row.snr_db = snr;
            row.transmitter = j;
            if (!st.converged) {
                row.sinr_db = std::numeric_limits<double>::quiet_NaN();
                row.status = "nonconvergence";
            } else if (touches_spectrum(st.rho[j], epsilon)) {
                row.sinr_db = std::numeric_limits<double>::quiet_NaN();
                row.status = "spectral-edge";
            } else {
                row.sinr_db = 10.0 * std::log10(st.pbar[j] * st.rho[j].real());
                row.status = "ok";
            }
            rows.push_back(std::move(row));
        }
        if (st.converged) warm = std::move(st);
    }
    return rows;
}

}  // namespace rmtspec
