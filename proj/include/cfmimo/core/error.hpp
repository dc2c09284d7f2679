// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: unknown-interference modeling and outage-constrained rate
// adaptation for the uplink of cell-free massive MIMO networks.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFMIMO_CORE_ERROR_HPP
#define CFMIMO_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cfmimo {

// Invalid configuration or out-of-contract arguments. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Factorization, quadrature or root-bracketing failures. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cfmimo

#endif
