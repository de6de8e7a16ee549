// Copyright 2026 The risfl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include "risfl/aircomp.hpp"
#include "risfl/channel.hpp"
#include "risfl/control.hpp"
#include "risfl/error.hpp"
#include "risfl/flsim.hpp"
#include "risfl/harness.hpp"
#include "risfl/matrix.hpp"
#include "risfl/phases.hpp"
#include "risfl/powopt.hpp"
#include "risfl/ris.hpp"
#include "risfl/rng.hpp"
#include "risfl/round.hpp"
#include "risfl/sysmodel.hpp"
