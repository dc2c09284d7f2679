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

#ifndef CFMIMO_CFMIMO_HPP
#define CFMIMO_CFMIMO_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/config.hpp"
#include "cfmimo/experiment.hpp"
#include "cfmimo/igsum/gil_pelaez.hpp"
#include "cfmimo/igsum/inverse_gamma.hpp"
#include "cfmimo/rateadapt.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/simulation.hpp"

#endif
