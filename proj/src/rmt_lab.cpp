#include "rmtspec/rmt_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmtspec {
namespace {

using cplx = std::complex<double>;

std::vector<double> cumulative_weights(const std::vector<double>& w) {
    std::vector<double> cum(w.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k];
        cum[k] = acc;
    }
    cum.back() = 1.0;
    return cum;
}

std::size_t sample_cumulative(const std::vector<double>& cum, double u) {
    return std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::complex<double> RngStream::complex_normal() {
    double re = normal();
    double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

double RngStream::draw(const SpectralMeasure& m) {
    double u = uniform01();
    double acc = 0.0;
    for (const Atom& a : m.atoms()) {
        acc += a.weight;
        if (u < acc) return a.location;
    }
    return m.atoms().back().location;
}

std::size_t RngStream::draw_index(const std::vector<double>& weights) {
    if (weights.empty()) throw InvalidMeasure("draw_index needs at least one weight");
    std::vector<double> cum = cumulative_weights(weights);
    std::size_t k = sample_cumulative(cum, uniform01());
    return std::min(k, weights.size() - 1);
}

namespace {

Eigen::MatrixXcd ginibre(int rows, int cols, RngStream& rng) {
    Eigen::MatrixXcd z(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) z(i, j) = rng.complex_normal();
    return z;
}

// phase-fixed thin QR of a Ginibre block: the first k columns of a Haar
// unitary, exactly distributed
Eigen::MatrixXcd haar_columns(int n, int k, RngStream& rng) {
    Eigen::MatrixXcd z = ginibre(n, k, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
    for (int j = 0; j < k; ++j) {
        cplx r = qr.matrixQR()(j, j);
        double mag = std::abs(r);
        if (mag > 0.0) q.col(j) *= r / mag;
    }
    return q;
}

Eigen::VectorXd draw_diagonal(const SpectralMeasure& m, int n, RngStream& rng) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = rng.draw(m);
    return d;
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace

Eigen::MatrixXcd sample_haar(int n, RngStream& rng) {
    if (n < 1) throw InvalidDimensions("matrix dimension must be positive");
    return haar_columns(n, n, rng);
}

Eigen::MatrixXcd sample_signatures(SignatureKind kind, int n, int k, RngStream& rng) {
    if (n < 1 || k < 0) throw InvalidDimensions("signature dimensions must be valid");
    if (k == 0) return Eigen::MatrixXcd(n, 0);
    if (kind == SignatureKind::isometric) {
        if (k > n) throw InvalidDimensions("isometric signatures require k <= n");
        return haar_columns(n, k, rng);
    }
    Eigen::MatrixXcd s = ginibre(n, k, rng);
    return s / std::sqrt(static_cast<double>(n));
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw InvalidDimensions("matrix must be square");
    double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-10) throw NotHermitian("symmetry defect exceeds 1e-10");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::complex<double> empirical_stieltjes(const Eigen::VectorXd& eigenvalues, HalfPlanePoint z) {
    cplx zc = z.value();
    cplx g = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) g += 1.0 / (eigenvalues(i) - zc);
    return g / static_cast<double>(eigenvalues.size());
}

std::complex<double> empirical_stieltjes(const Eigen::MatrixXcd& m, HalfPlanePoint z) {
    return empirical_stieltjes(hermitian_eigenvalues(m), z);
}

Eigen::MatrixXcd build_sum(const std::vector<SpectralMeasure>& measures, int n, RngStream& rng) {
    if (measures.empty()) throw InvalidMeasure("at least one summand measure is required");
    if (n < 1) throw InvalidDimensions("matrix dimension must be positive");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (const SpectralMeasure& measure : measures) {
        Eigen::MatrixXcd v = sample_haar(n, rng);
        Eigen::VectorXd d = draw_diagonal(measure, n, rng);
        m += v * d.asDiagonal() * v.adjoint();
    }
    return hermitize(m);
}

Eigen::MatrixXcd build_product_hermitized(const SpectralMeasure& m1, const SpectralMeasure& m2,
                                          int n, RngStream& rng) {
    if (n < 1) throw InvalidDimensions("matrix dimension must be positive");
    if (m1.min_location() < 0.0 || m2.min_location() < 0.0)
        throw UnsupportedFactorSign("product factors must be supported on [0, inf)");
    Eigen::MatrixXcd v = sample_haar(n, rng);
    Eigen::VectorXd b = draw_diagonal(m2, n, rng);
    Eigen::VectorXd a = draw_diagonal(m1, n, rng);
    Eigen::MatrixXcd rotated = v * b.asDiagonal() * v.adjoint();
    Eigen::VectorXd sqrt_a = a.cwiseSqrt();
    return hermitize(sqrt_a.asDiagonal() * rotated * sqrt_a.asDiagonal());
}

CdmaInstance build_cdma(const CdmaScenario& scenario, int n, RngStream& rng) {
    validate(scenario);
    if (n < 1) throw InvalidDimensions("matrix dimension must be positive");
    std::size_t j_count = scenario.transmitters.size();

    std::vector<double> atom_weights;
    atom_weights.reserve(scenario.channel.size());
    for (const JointAtom& a : scenario.channel.atoms()) atom_weights.push_back(a.weight);
    std::vector<double> cum = cumulative_weights(atom_weights);

    CdmaInstance inst;
    inst.n = n;
    inst.noise_variance = scenario.noise_variance;
    inst.transmitters.resize(j_count);
    for (std::size_t j = 0; j < j_count; ++j) inst.transmitters[j].channel.resize(n);

    // one joint channel atom per matrix index keeps cross-transmitter gain
    // correlation intact
    for (int i = 0; i < n; ++i) {
        std::size_t idx = std::min(sample_cumulative(cum, rng.uniform01()),
                                   scenario.channel.size() - 1);
        const JointAtom& atom = scenario.channel.atoms()[idx];
        for (std::size_t j = 0; j < j_count; ++j) inst.transmitters[j].channel(i) = atom.h[j];
    }

    inst.r = inst.noise_variance * Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t j = 0; j < j_count; ++j) {
        const TransmitterSpec& spec = scenario.transmitters[j];
        CdmaTransmitterDraw& draw = inst.transmitters[j];
        draw.kind = spec.kind;
        draw.k = static_cast<int>(std::lround(spec.alpha * n));
        if (spec.kind == SignatureKind::isometric) draw.k = std::min(draw.k, n);
        draw.s = sample_signatures(spec.kind, n, draw.k, rng);
        draw.power = draw_diagonal(spec.power, draw.k, rng);
        Eigen::MatrixXcd c = draw.channel.cwiseSqrt().asDiagonal() * draw.s *
                             draw.power.cwiseSqrt().asDiagonal();
        inst.r += c * c.adjoint();
    }
    inst.r = hermitize(inst.r);
    return inst;
}

namespace {

Eigen::MatrixXcd stable_inverse(const Eigen::MatrixXcd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    const Eigen::VectorXd& ev = es.eigenvalues();
    double lam_max = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() <= 1e-12 * std::max(1.0, lam_max))
        throw SingularCorrelation("correlation matrix is numerically singular");
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

EmpiricalSinrResult empirical_sinr(const CdmaInstance& instance) {
    Eigen::MatrixXcd rinv = stable_inverse(instance.r);
    EmpiricalSinrResult out;
    out.rho_by_transmitter.resize(instance.transmitters.size());
    for (std::size_t j = 0; j < instance.transmitters.size(); ++j) {
        const CdmaTransmitterDraw& t = instance.transmitters[j];
        Eigen::VectorXd sqrt_h = t.channel.cwiseSqrt();
        Eigen::MatrixXcd scaled = sqrt_h.asDiagonal() * t.s;  // columns u_k = H_j s_k
        Eigen::MatrixXcd solved = rinv * scaled;
        for (int k = 0; k < t.k; ++k) {
            double q = scaled.col(k).dot(solved.col(k)).real();
            double p = t.power(k);
            // rank-one downdate: u* (R - p u u*)^-1 u = q / (1 - p q)
            double rho = q / (1.0 - p * q);
            out.rows.push_back({j, static_cast<std::size_t>(k), rho, p * rho});
        }
        double trace_full = 0.0;
        for (int i = 0; i < instance.n; ++i)
            trace_full += t.channel(i) * rinv(i, i).real();
        if (t.kind == SignatureKind::iid) {
            out.rho_by_transmitter[j] = trace_full / instance.n;
        } else if (t.k < instance.n) {
            double projected = trace_full;
            Eigen::MatrixXcd m2s = sqrt_h.asDiagonal() * solved;
            for (int k = 0; k < t.k; ++k) projected -= t.s.col(k).dot(m2s.col(k)).real();
            out.rho_by_transmitter[j] = projected / (instance.n - t.k);
        } else {
            out.rho_by_transmitter[j] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

double empirical_tau_iid(const CdmaInstance& instance, std::size_t j) {
    if (j >= instance.transmitters.size())
        throw InvalidDimensions("transmitter index out of range");
    const CdmaTransmitterDraw& t = instance.transmitters[j];
    if (t.kind != SignatureKind::iid)
        throw UnsupportedDiagnostic("tau trace diagnostic is defined for iid signatures only");
    Eigen::MatrixXcd rinv = stable_inverse(instance.r);
    Eigen::MatrixXcd scaled = t.channel.cwiseSqrt().asDiagonal() * t.s;
    Eigen::VectorXd p_sq = t.power.cwiseProduct(t.power);
    Eigen::MatrixXcd trace_arg = scaled * p_sq.asDiagonal() * scaled.adjoint() * rinv;
    return trace_arg.trace().real() / instance.n;
}

ConcentrationResult concentration_check(const SpectralMeasure& measure, int n, int k, int trials,
                                        RngStream& rng, SignatureKind kind) {
    if (n < 1 || k < 0 || trials < 1)
        throw InvalidDimensions("concentration check needs n >= 1, k >= 0, trials >= 1");
    if (kind == SignatureKind::isometric && k + 1 > n)
        throw InvalidDimensions("isometric concentration check needs k + 1 <= n");
    Eigen::MatrixXcd v = sample_haar(n, rng);
    Eigen::VectorXd d = draw_diagonal(measure, n, rng);
    Eigen::MatrixXcd x = hermitize(v * d.asDiagonal() * v.adjoint());
    double trace = x.trace().real();

    ConcentrationResult out;
    for (int trial = 0; trial < trials; ++trial) {
        double dev = 0.0;
        if (kind == SignatureKind::isometric) {
            Eigen::MatrixXcd cols = haar_columns(n, k + 1, rng);
            double quad = cols.col(0).dot(x * cols.col(0)).real();
            double projected = trace;
            for (int c = 1; c <= k; ++c) projected -= cols.col(c).dot(x * cols.col(c)).real();
            dev = std::abs(quad - projected / (n - k));
        } else {
            Eigen::VectorXcd y(n);
            for (int i = 0; i < n; ++i) y(i) = rng.complex_normal();
            y /= std::sqrt(static_cast<double>(n));
            dev = std::abs(y.dot(x * y).real() - trace / n);
        }
        out.max_deviation = std::max(out.max_deviation, dev);
        out.mean_deviation += dev;
    }
    out.mean_deviation /= trials;
    return out;
}

}  // namespace rmtspec
