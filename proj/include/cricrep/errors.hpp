#pragma once

#include <stdexcept>

namespace cricrep {

#define CRICREP_ERROR(Name)                   \
    struct Name : std::runtime_error {        \
        using std::runtime_error::runtime_error; \
    }

CRICREP_ERROR(ShapeError);
CRICREP_ERROR(IndexError);
CRICREP_ERROR(FrozenParameterError);
CRICREP_ERROR(EmptyPoolError);
CRICREP_ERROR(DegenerateDataError);
CRICREP_ERROR(ValidationError);
CRICREP_ERROR(LoadError);
CRICREP_ERROR(SpecError);
CRICREP_ERROR(SplitError);
CRICREP_ERROR(LookupError);
CRICREP_ERROR(ConfigurationError);
CRICREP_ERROR(ModelFormatError);
CRICREP_ERROR(SamplingError);
CRICREP_ERROR(DomainError);
CRICREP_ERROR(NumericFailure);

#undef CRICREP_ERROR

}  // namespace cricrep
