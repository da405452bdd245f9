#pragma once

#include <stdexcept>
#include <string>

namespace amink {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define AMINK_DEFINE_ERROR(Name)                                \
    struct Name : Error {                                       \
        explicit Name(const std::string& what = #Name)          \
            : Error(what) {}                                    \
    }

AMINK_DEFINE_ERROR(EmptyInput);
AMINK_DEFINE_ERROR(OriginNotInteriorError);
AMINK_DEFINE_ERROR(DimTooLarge);
AMINK_DEFINE_ERROR(DimMismatch);
AMINK_DEFINE_ERROR(ZeroDirection);
AMINK_DEFINE_ERROR(ZeroScale);
AMINK_DEFINE_ERROR(NegativeDim);
AMINK_DEFINE_ERROR(OutOfDomain);
AMINK_DEFINE_ERROR(RankDeficient);
AMINK_DEFINE_ERROR(EmptyCloud);
AMINK_DEFINE_ERROR(NonpositiveRadius);
AMINK_DEFINE_ERROR(BadResolution);
AMINK_DEFINE_ERROR(ScheduleTooShort);
AMINK_DEFINE_ERROR(ResolutionTooCoarse);
AMINK_DEFINE_ERROR(UnknownScenario);
AMINK_DEFINE_ERROR(UnsupportedShape);

#undef AMINK_DEFINE_ERROR

}  // namespace amink
