// Copyright 2026 The pm-statkit Authors
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

#pragma once

// Everything except the JSON-dependent headers (io.hpp, scenario.hpp).

#include "pmstat/ddf.hpp"
#include "pmstat/density.hpp"
#include "pmstat/index_set.hpp"
#include "pmstat/levy.hpp"
#include "pmstat/matrix.hpp"
#include "pmstat/pmspace.hpp"
#include "pmstat/statconv.hpp"
#include "pmstat/summable.hpp"
#include "pmstat/trifn.hpp"
#include "pmstat/verdict.hpp"
