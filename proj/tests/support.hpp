#pragma once

#include "generators.hpp"

#include "qcvar/error.hpp"

#include <gtest/gtest.h>

namespace qcvar::testing {

/// Kind of the qcvar::Error thrown by f; ErrorKind::internal (and a test
/// failure) when f does not throw one.
template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::internal;
}

}  // namespace qcvar::testing
