// Copyright 2026 The zne-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace zne {

/// Caller violated a documented precondition (bad shapes, wrong counts, ...).
class UsageError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Register too large for the dense representation.
class CapacityError : public std::length_error {
   public:
    using std::length_error::length_error;
};

/// A physical model description is inconsistent (e.g. T2 > 2 T1).
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a closed-form expression (poles etc).
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Integration, inversion or sampling pipeline could not produce a result.
class NumericalError : public std::runtime_error {
   public:
    explicit NumericalError(const std::string &what, double achieved = 0.0)
        : std::runtime_error(what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

   private:
    double achieved_;
};

}  // namespace zne
