#include "rmtspec/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rmtspec {
namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kWeightSumTol = 1e-12;

// Long atom lists accumulate one ulp of roundoff per addition, so the unit-sum
// check loosens with the count before the weights are renormalized.
double weight_sum_tolerance(std::size_t count) {
    return std::max(kWeightSumTol, 8.0 * std::numeric_limits<double>::epsilon() * double(count));
}

bool close_locations(double a, double b) {
    return std::abs(a - b) <= kMergeTol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidMeasure("measure needs at least one atom");
    for (const Atom& a : atoms) {
        if (!std::isfinite(a.location) || !std::isfinite(a.weight))
            throw InvalidMeasure("atom with non-finite location or weight");
        if (a.weight <= 0.0) throw InvalidMeasure("atom weights must be strictly positive");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& x, const Atom& y) { return x.location < y.location; });
    for (const Atom& a : atoms) {
        if (!atoms_.empty() && close_locations(atoms_.back().location, a.location)) {
            Atom& last = atoms_.back();
            double w = last.weight + a.weight;
            last.location = (last.location * last.weight + a.location * a.weight) / w;
            last.weight = w;
        } else {
            atoms_.push_back(a);
        }
    }
    double sum = 0.0;
    for (const Atom& a : atoms_) sum += a.weight;
    if (std::abs(sum - 1.0) > weight_sum_tolerance(atoms_.size()))
        throw InvalidMeasure("atom weights must sum to one");
    for (Atom& a : atoms_) {
        a.weight /= sum;
        support_bound_ = std::max(support_bound_, std::abs(a.location));
    }
}

double SpectralMeasure::mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.weight * a.location;
    return m;
}

SpectralMeasure point_mass(double location) {
    return SpectralMeasure({{location, 1.0}});
}

SpectralMeasure from_samples(const std::vector<double>& samples) {
    if (samples.empty()) throw InvalidMeasure("from_samples needs at least one sample");
    std::vector<Atom> atoms;
    atoms.reserve(samples.size());
    double w = 1.0 / static_cast<double>(samples.size());
    for (double s : samples) atoms.push_back({s, w});
    return SpectralMeasure(std::move(atoms));
}

namespace {

std::vector<double> midpoint_quantiles(std::size_t m) {
    std::vector<double> u(m);
    for (std::size_t k = 0; k < m; ++k)
        u[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    return u;
}

SpectralMeasure equal_weight_measure(const std::vector<double>& locations) {
    std::vector<Atom> atoms;
    atoms.reserve(locations.size());
    double w = 1.0 / static_cast<double>(locations.size());
    for (double x : locations) atoms.push_back({x, w});
    return SpectralMeasure(std::move(atoms));
}

SpectralMeasure discretize_exponential(const ExponentialFamily& f, std::size_t m) {
    if (!(f.mean > 0.0) || !std::isfinite(f.mean))
        throw InvalidMeasure("exponential family needs a positive mean");
    // Truncate at the 1 - 1e-8 quantile and renormalize so the tail does not
    // place one huge atom arbitrarily far out.
    constexpr double trunc = 1.0 - 1e-8;
    std::vector<double> locs;
    for (double u : midpoint_quantiles(m)) locs.push_back(-f.mean * std::log1p(-u * trunc));
    return equal_weight_measure(locs);
}

SpectralMeasure discretize_uniform(const UniformFamily& f, std::size_t m) {
    if (!std::isfinite(f.a) || !std::isfinite(f.b) || !(f.b > f.a))
        throw InvalidMeasure("uniform family needs b > a");
    std::vector<double> locs;
    for (double u : midpoint_quantiles(m)) locs.push_back(f.a + (f.b - f.a) * u);
    return equal_weight_measure(locs);
}

SpectralMeasure discretize_semicircle(const SemicircleFamily& f, std::size_t m) {
    if (!(f.variance > 0.0) || !std::isfinite(f.variance))
        throw InvalidMeasure("semicircle family needs a positive variance");
    double r = 2.0 * std::sqrt(f.variance);
    auto cdf = [r](double x) {
        double t = std::clamp(x / r, -1.0, 1.0);
        return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / M_PI;
    };
    std::vector<double> locs;
    for (double u : midpoint_quantiles(m)) {
        double lo = -r, hi = r;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * r; ++it) {
            double mid = 0.5 * (lo + hi);
            (cdf(mid) < u ? lo : hi) = mid;
        }
        locs.push_back(0.5 * (lo + hi));
    }
    return equal_weight_measure(locs);
}

SpectralMeasure discretize_bernoulli(const BernoulliFamily& f) {
    if (!(f.p >= 0.0 && f.p <= 1.0)) throw InvalidMeasure("bernoulli needs p in [0, 1]");
    if (!std::isfinite(f.lo) || !std::isfinite(f.hi) || f.lo > f.hi)
        throw InvalidMeasure("bernoulli needs lo <= hi");
    if (f.lo == f.hi || f.p == 0.0) return point_mass(f.lo);
    if (f.p == 1.0) return point_mass(f.hi);
    return SpectralMeasure({{f.lo, 1.0 - f.p}, {f.hi, f.p}});
}

}  // namespace

SpectralMeasure discretize_family(const DistributionFamily& family, std::size_t atom_count) {
    if (atom_count == 0) throw InvalidMeasure("atom_count must be positive");
    return std::visit(
        [&](const auto& f) -> SpectralMeasure {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExponentialFamily>)
                return discretize_exponential(f, atom_count);
            else if constexpr (std::is_same_v<T, UniformFamily>)
                return discretize_uniform(f, atom_count);
            else if constexpr (std::is_same_v<T, SemicircleFamily>)
                return discretize_semicircle(f, atom_count);
            else
                return discretize_bernoulli(f);
        },
        family);
}

JointChannelMeasure::JointChannelMeasure(std::size_t dimension, std::vector<JointAtom> atoms)
    : dimension_(dimension) {
    if (dimension_ == 0) throw InvalidMeasure("joint measure needs dimension >= 1");
    if (atoms.empty()) throw InvalidMeasure("joint measure needs at least one atom");
    for (const JointAtom& a : atoms) {
        if (a.h.size() != dimension_)
            throw InvalidMeasure("joint atom dimension mismatch");
        for (double h : a.h) {
            if (!std::isfinite(h) || h < 0.0)
                throw InvalidMeasure("channel gains must be finite and nonnegative");
        }
        if (!std::isfinite(a.weight) || a.weight <= 0.0)
            throw InvalidMeasure("atom weights must be strictly positive");
    }
    std::sort(atoms.begin(), atoms.end(), [](const JointAtom& x, const JointAtom& y) {
        return std::lexicographical_compare(x.h.begin(), x.h.end(), y.h.begin(), y.h.end());
    });
    auto same_tuple = [this](const JointAtom& x, const JointAtom& y) {
        for (std::size_t j = 0; j < dimension_; ++j)
            if (!close_locations(x.h[j], y.h[j])) return false;
        return true;
    };
    for (const JointAtom& a : atoms) {
        if (!atoms_.empty() && same_tuple(atoms_.back(), a))
            atoms_.back().weight += a.weight;
        else
            atoms_.push_back(a);
    }
    double sum = 0.0;
    for (const JointAtom& a : atoms_) sum += a.weight;
    if (std::abs(sum - 1.0) > weight_sum_tolerance(atoms_.size()))
        throw InvalidMeasure("atom weights must sum to one");
    for (JointAtom& a : atoms_) a.weight /= sum;
}

SpectralMeasure JointChannelMeasure::marginal(std::size_t j) const {
    if (j >= dimension_) throw InvalidMeasure("marginal index out of range");
    std::vector<Atom> atoms;
    atoms.reserve(atoms_.size());
    for (const JointAtom& a : atoms_) atoms.push_back({a.h[j], a.weight});
    return SpectralMeasure(std::move(atoms));
}

double JointChannelMeasure::max_gain(std::size_t j) const {
    if (j >= dimension_) throw InvalidMeasure("marginal index out of range");
    double m = 0.0;
    for (const JointAtom& a : atoms_) m = std::max(m, a.h[j]);
    return m;
}

JointChannelMeasure joint_independent(const std::vector<SpectralMeasure>& marginals,
                                      std::size_t max_atoms) {
    if (marginals.empty()) throw InvalidMeasure("joint_independent needs at least one marginal");
    std::size_t count = 1;
    for (const SpectralMeasure& m : marginals) {
        if (m.size() > 0 && count > max_atoms / m.size())
            throw MeasureTooLarge("joint measure would exceed the atom cap");
        count *= m.size();
    }
    std::size_t j_dim = marginals.size();
    std::vector<JointAtom> atoms(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        JointAtom& a = atoms[idx];
        a.h.resize(j_dim);
        a.weight = 1.0;
        std::size_t rem = idx;
        for (std::size_t j = j_dim; j-- > 0;) {
            const auto& src = marginals[j].atoms();
            std::size_t k = rem % src.size();
            rem /= src.size();
            a.h[j] = src[k].location;
            a.weight *= src[k].weight;
        }
    }
    return JointChannelMeasure(j_dim, std::move(atoms));
}

}  // namespace rmtspec
