#pragma once

#include <stdexcept>
#include <string>

namespace wawenet {

// All library failures are reported through one of these types so callers can
// distinguish "your input is wrong" from "this file is damaged" and so on.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define WAWENET_DEFINE_ERROR(Name)                                            \
    struct Name : Error {                                                     \
        explicit Name(const std::string& what) : Error(what) {}               \
    }

WAWENET_DEFINE_ERROR(InvalidLength);    // signal length violates a precondition
WAWENET_DEFINE_ERROR(InvalidShape);     // matrix/vector dimensions disagree
WAWENET_DEFINE_ERROR(InvalidConfig);    // inconsistent model or run configuration
WAWENET_DEFINE_ERROR(StateError);       // operation applied in the wrong order
WAWENET_DEFINE_ERROR(NoSpeech);         // level meter found no qualifying activity
WAWENET_DEFINE_ERROR(EmptyResult);      // an operation produced nothing to return
WAWENET_DEFINE_ERROR(RangeError);       // value outside its declared range
WAWENET_DEFINE_ERROR(DegenerateInput);  // statistic undefined for this input
WAWENET_DEFINE_ERROR(CorruptFile);      // container recognized but contents damaged
WAWENET_DEFINE_ERROR(UnsupportedFormat);   // file format we do not handle
WAWENET_DEFINE_ERROR(UnsupportedVersion);  // format version newer than this code
WAWENET_DEFINE_ERROR(ParseError);       // text input could not be parsed

#undef WAWENET_DEFINE_ERROR

}  // namespace wawenet
