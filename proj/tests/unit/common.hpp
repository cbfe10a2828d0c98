#pragma once

#include <doctest.h>

#include <functional>

#include "cvinfer/error.hpp"

// Code of the cvinfer::Error thrown by fn; fails the test when nothing is thrown.
inline cvinfer::ErrorCode error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const cvinfer::Error& e) {
    return e.code();
  }
  FAIL("expected a cvinfer::Error");
  return cvinfer::ErrorCode::usage;
}
