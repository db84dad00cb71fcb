#ifndef CADM_TESTS_TEST_UTIL_H_
#define CADM_TESTS_TEST_UTIL_H_

#include <gtest/gtest.h>

#include "cadm/error.h"

namespace cadm {

// Code of the cadm::Error thrown by |fn|; records a failure if none is.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

}  // namespace cadm

#endif  // CADM_TESTS_TEST_UTIL_H_
