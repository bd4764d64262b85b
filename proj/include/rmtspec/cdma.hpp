#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "rmtspec/measure.hpp"
#include "rmtspec/solver_config.hpp"
#include "rmtspec/stieltjes.hpp"

namespace rmtspec {

enum class SignatureKind { iid, isometric };

std::string to_string(SignatureKind kind);
SignatureKind signature_kind_from_string(const std::string& s);

struct TransmitterSpec {
    double alpha = 1.0;  // load K/N; isometric signatures require alpha <= 1
    SignatureKind kind = SignatureKind::iid;
    SpectralMeasure power;
};

struct CdmaScenario {
    std::vector<TransmitterSpec> transmitters;
    JointChannelMeasure channel;  // dimension == transmitters.size()
    double noise_variance = 0.0;
};

void validate(const CdmaScenario& scenario);

struct CdmaFixedPointState {
    std::complex<double> g;
    std::vector<std::complex<double>> rho;
    std::vector<std::complex<double>> tau;
    std::vector<std::complex<double>> calP;  // E[P/(1 + P rho_j)] at the final rho
    std::vector<std::complex<double>> calH;  // channel average at the final tau
    std::vector<double> pbar;                // per-transmitter mean power
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// E[P/(1 + P rho)] over the power measure.
std::complex<double> eval_calP(const SpectralMeasure& power, std::complex<double> rho);

// E[H_j / (-z + sum_i weights_i H_i)] over the joint channel measure.
std::complex<double> eval_calH(const JointChannelMeasure& channel, std::size_t j,
                               const std::vector<std::complex<double>>& weights,
                               std::complex<double> z);

// Coupled fixed point for the correlation-matrix resolvent; g is the
// Stieltjes transform of the squared-singular-value distribution and rho_j
// the large-system SINR kernel of transmitter j at unit power.
CdmaFixedPointState solve_theorem1(const CdmaScenario& scenario, HalfPlanePoint z,
                                   const SolverConfig& cfg = {});

// Asymptotic MMSE SINR for a transmitter-j user received at power_level,
// evaluated at z = (-noise_variance, epsilon).  A power level outside the
// support of the power measure only warns; an imaginary part of rho_j larger
// than 1e3 * epsilon * (1 + |rho_j|^2) means the evaluation point touches
// the spectrum and raises SpectralEdge.
double sinr(const CdmaScenario& scenario, double power_level, std::size_t j,
            double epsilon = 1e-8, const SolverConfig& cfg = {});

struct SinrRow {
    double snr_db = 0.0;
    std::size_t transmitter = 0;
    double sinr_db = 0.0;
    std::string status;  // "ok", "nonconvergence", or "spectral-edge"
};

// SINR of each transmitter (at its mean power) across an SNR sweep.  The
// noise variance is set per point to 1/snr_linear, which matches
// snr = E[P] E[H] / noise_variance under unit-mean powers and channels.
std::vector<SinrRow> sinr_sweep(const CdmaScenario& scenario,
                                const std::vector<double>& snr_db,
                                const SolverConfig& cfg = {});

}  // namespace rmtspec
