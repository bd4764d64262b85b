#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rmtspec/cdma.hpp"
#include "rmtspec/measure.hpp"
#include "rmtspec/stieltjes.hpp"

namespace rmtspec {

// Deterministic, platform-independent random stream: mt19937_64 driven
// through hand-rolled uniform and Box-Muller maps (std distributions are
// implementation-defined).  Identical (seed, stream_id) pairs reproduce
// identical draws, so independent trials are keyed by stream id.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();                     // [0, 1), 53-bit resolution
    double normal();                        // standard normal
    std::complex<double> complex_normal();  // CN(0, 1)
    double draw(const SpectralMeasure& m);  // one atom location by weight
    std::size_t draw_index(const std::vector<double>& weights);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
// the R diagonal absorbed into Q.
Eigen::MatrixXcd sample_haar(int n, RngStream& rng);

// n x k signature matrix: iid entries CN(0, 1/n), or the first k columns of a
// Haar unitary (thin phase-fixed QR).  Isometric requires k <= n.
Eigen::MatrixXcd sample_signatures(SignatureKind kind, int n, int k, RngStream& rng);

// Eigenvalues of a Hermitian matrix; symmetry defect above 1e-10 raises
// NotHermitian.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

std::complex<double> empirical_stieltjes(const Eigen::MatrixXcd& m, HalfPlanePoint z);
std::complex<double> empirical_stieltjes(const Eigen::VectorXd& eigenvalues, HalfPlanePoint z);

// sum_j V_j D_j V_j*, independent Haar V_j, D_j diagonal of n iid draws.
Eigen::MatrixXcd build_sum(const std::vector<SpectralMeasure>& measures, int n, RngStream& rng);

// A^{1/2} B A^{1/2} with A = diag of draws from m1 and B Haar-rotated from
// m2; both factors must be supported on [0, inf).
Eigen::MatrixXcd build_product_hermitized(const SpectralMeasure& m1, const SpectralMeasure& m2,
                                          int n, RngStream& rng);

struct CdmaTransmitterDraw {
    SignatureKind kind = SignatureKind::iid;
    int k = 0;
    Eigen::VectorXd channel;  // gains h_j[i], one per matrix index
    Eigen::MatrixXcd s;       // n x k signatures
    Eigen::VectorXd power;    // stream powers p_{j,k}
};

struct CdmaInstance {
    int n = 0;
    double noise_variance = 0.0;
    std::vector<CdmaTransmitterDraw> transmitters;
    Eigen::MatrixXcd r;  // noise_variance * I + sum_j C_j C_j*
};

// One finite-size realization of the correlation matrix; channel gains are
// drawn jointly across transmitters, one joint atom per matrix index.
CdmaInstance build_cdma(const CdmaScenario& scenario, int n, RngStream& rng);

struct EmpiricalSinrRow {
    std::size_t transmitter = 0;
    std::size_t stream = 0;
    double rho = 0.0;
    double sinr = 0.0;
};

struct EmpiricalSinrResult {
    std::vector<EmpiricalSinrRow> rows;
    // Trace estimates of the per-transmitter SINR kernel: iid uses
    // tr[H_j* R^-1 H_j]/N, isometric the projected variant
    // tr[(I - S_j S_j*) H_j* R^-1 H_j]/(N - K_j).
    std::vector<double> rho_by_transmitter;
};

// Exact per-stream MMSE SINR of one realization via rank-one downdates of
// R^-1; a singular correlation matrix raises SingularCorrelation.
EmpiricalSinrResult empirical_sinr(const CdmaInstance& instance);

// Trace estimate of the tau field of an iid transmitter,
// tr[H S A^4 S* H* R^-1]/N; isometric transmitters raise
// UnsupportedDiagnostic.
double empirical_tau_iid(const CdmaInstance& instance, std::size_t j);

struct ConcentrationResult {
    double max_deviation = 0.0;
    double mean_deviation = 0.0;
};

// Deviation of the quadratic form s* X s from its trace predictor, X a fixed
// Haar-rotated diagonal from the measure.  Isometric: s is a Haar column, the
// predictor is tr[(I - S S*) X]/(n - k) with S the next k columns.  Iid: s
// has CN(0, 1/n) entries and the predictor is tr[X]/n.
ConcentrationResult concentration_check(const SpectralMeasure& measure, int n, int k, int trials,
                                        RngStream& rng,
                                        SignatureKind kind = SignatureKind::isometric);

}  // namespace rmtspec
