#pragma once

#include <stdexcept>
#include <string>

namespace labo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define LABO_DEFINE_ERROR(Name)                      \
  struct Name : Error {                              \
    using Error::Error;                              \
  }

LABO_DEFINE_ERROR(MalformedVector);
LABO_DEFINE_ERROR(GeometryError);
LABO_DEFINE_ERROR(UnsupportedMesh);
LABO_DEFINE_ERROR(ShapeMismatch);
LABO_DEFINE_ERROR(NonPositiveSigma);
LABO_DEFINE_ERROR(MissingLabels);
LABO_DEFINE_ERROR(EmptyDataset);
LABO_DEFINE_ERROR(UnsupportedSmoothness);
LABO_DEFINE_ERROR(SingularGram);
LABO_DEFINE_ERROR(UnfittedModel);
LABO_DEFINE_ERROR(ConfigError);
LABO_DEFINE_ERROR(SchemaMismatch);

#undef LABO_DEFINE_ERROR

}  // namespace labo
