// Copyright 2026 The Realfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REALFILTER_REALFILTER_HPP_
#define REALFILTER_REALFILTER_HPP_

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/instance_io.hpp"
#include "realfilter/mech_filters.hpp"
#include "realfilter/mechanisms.hpp"
#include "realfilter/normal.hpp"
#include "realfilter/numeric.hpp"
#include "realfilter/pure_dp.hpp"
#include "realfilter/real_filter.hpp"
#include "realfilter/sim.hpp"
#include "realfilter/strategies.hpp"
#include "realfilter/verify.hpp"

#endif  // REALFILTER_REALFILTER_HPP_
