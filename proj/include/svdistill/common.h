// svdistill/common.h

// Copyright 2026  The svdistill authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVDISTILL_COMMON_H_
#define SVDISTILL_COMMON_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace svdistill {

// Usage / configuration errors (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string &msg) : std::invalid_argument(msg) {}
};

// Runtime / data errors: bad files, dimension mismatches, degenerate
// inputs (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

namespace internal {
template <typename... Args>
std::string FormatMsg(Args &&...args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace internal

// SVD_CHECK(cond, ...) throws DataError with the streamed message.
#define SVD_CHECK(cond, ...)                                               \
  do {                                                                     \
    if (!(cond))                                                           \
      throw ::svdistill::DataError(                                        \
          ::svdistill::internal::FormatMsg("check failed: " #cond ": ",    \
                                           __VA_ARGS__));                  \
  } while (0)

}  // namespace svdistill

#endif  // SVDISTILL_COMMON_H_
