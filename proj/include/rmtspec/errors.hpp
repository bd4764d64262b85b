#pragma once

#include <stdexcept>
#include <string>

namespace rmtspec {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define RMTSPEC_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

RMTSPEC_DEFINE_ERROR(InvalidMeasure);
RMTSPEC_DEFINE_ERROR(MeasureTooLarge);
RMTSPEC_DEFINE_ERROR(InvalidGrid);
RMTSPEC_DEFINE_ERROR(InversionFailed);
RMTSPEC_DEFINE_ERROR(NonConvergence);
RMTSPEC_DEFINE_ERROR(DegenerateMeasure);
RMTSPEC_DEFINE_ERROR(AmbiguousFixedPoint);
RMTSPEC_DEFINE_ERROR(EvaluationPole);
RMTSPEC_DEFINE_ERROR(SpectralEdge);
RMTSPEC_DEFINE_ERROR(InvalidScenario);
RMTSPEC_DEFINE_ERROR(InvalidDimensions);
RMTSPEC_DEFINE_ERROR(NotHermitian);
RMTSPEC_DEFINE_ERROR(SingularCorrelation);
RMTSPEC_DEFINE_ERROR(UnsupportedFactorSign);
RMTSPEC_DEFINE_ERROR(UnsupportedDiagnostic);

#undef RMTSPEC_DEFINE_ERROR

}  // namespace rmtspec
