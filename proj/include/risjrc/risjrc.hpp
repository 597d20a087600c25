// SPDX-License-Identifier: Apache-2.0
//
// risjrc: link-level simulation of RIS-assisted joint radar-communication
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

#pragma once

#include "risjrc/core.hpp"
#include "risjrc/geometry.hpp"
#include "risjrc/rng.hpp"
#include "risjrc/parallel.hpp"
#include "risjrc/channels.hpp"
#include "risjrc/codebook.hpp"
#include "risjrc/codebook_io.hpp"
#include "risjrc/localization.hpp"
#include "risjrc/comms.hpp"
#include "risjrc/harness/config.hpp"
#include "risjrc/harness/experiments.hpp"
