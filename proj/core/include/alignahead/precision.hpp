#pragma once

// Scalar type selection. The core library is built once per precision and each
// build places its symbols in a distinct inline namespace.

#if defined(ALIGNAHEAD_SINGLE_PRECISION)
#define ALIGNAHEAD_PRECISION_NS f32
#else
#define ALIGNAHEAD_PRECISION_NS f64
#endif

#define ALIGNAHEAD_NAMESPACE_BEGIN \
  namespace alignahead {           \
  inline namespace ALIGNAHEAD_PRECISION_NS {
#define ALIGNAHEAD_NAMESPACE_END \
  }                              \
  }

ALIGNAHEAD_NAMESPACE_BEGIN

#if defined(ALIGNAHEAD_SINGLE_PRECISION)
using Real = float;
inline constexpr const char* kPrecisionName = "f32";
#else
using Real = double;
inline constexpr const char* kPrecisionName = "f64";
#endif

ALIGNAHEAD_NAMESPACE_END
