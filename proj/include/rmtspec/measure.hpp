#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "rmtspec/errors.hpp"

namespace rmtspec {

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

// Purely atomic probability measure on the real line.  Atoms are kept sorted
// by location; locations closer than 1e-12 (relative) are merged and weights
// must be strictly positive and sum to one within 1e-12.
class SpectralMeasure {
public:
    explicit SpectralMeasure(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double support_bound() const { return support_bound_; }
    double min_location() const { return atoms_.front().location; }
    double max_location() const { return atoms_.back().location; }
    double mean() const;

private:
    std::vector<Atom> atoms_;
    double support_bound_ = 0.0;
};

SpectralMeasure point_mass(double location);
SpectralMeasure from_samples(const std::vector<double>& samples);

struct ExponentialFamily {
    double mean = 1.0;
};
struct UniformFamily {
    double a = 0.0;
    double b = 1.0;
};
struct SemicircleFamily {
    double variance = 1.0;
};
struct BernoulliFamily {
    double p = 0.5;
    double lo = 0.0;
    double hi = 1.0;
};

using DistributionFamily =
    std::variant<ExponentialFamily, UniformFamily, SemicircleFamily, BernoulliFamily>;

// Quantile-rule discretization: atom k sits at the ((k - 1/2)/M)-quantile with
// weight 1/M.  Bernoulli ignores atom_count (two atoms exactly).
SpectralMeasure discretize_family(const DistributionFamily& family, std::size_t atom_count);

struct JointAtom {
    std::vector<double> h;  // one nonnegative channel gain per dimension
    double weight = 0.0;
};

// Joint law of the per-transmitter channel gains at one matrix index.
class JointChannelMeasure {
public:
    JointChannelMeasure(std::size_t dimension, std::vector<JointAtom> atoms);

    std::size_t dimension() const { return dimension_; }
    const std::vector<JointAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    SpectralMeasure marginal(std::size_t j) const;
    double max_gain(std::size_t j) const;

private:
    std::size_t dimension_ = 0;
    std::vector<JointAtom> atoms_;
};

// Product measure of independent marginals; throws MeasureTooLarge past the cap.
JointChannelMeasure joint_independent(const std::vector<SpectralMeasure>& marginals,
                                      std::size_t max_atoms = 1000000);

}  // namespace rmtspec
