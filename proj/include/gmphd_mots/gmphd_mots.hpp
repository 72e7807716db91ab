// Copyright 2026 The gmphd_mots Authors
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

#include "gmphd_mots/affinity.hpp"
#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/evaluation.hpp"
#include "gmphd_mots/gmphd.hpp"
#include "gmphd_mots/hungarian.hpp"
#include "gmphd_mots/io.hpp"
#include "gmphd_mots/kcf.hpp"
#include "gmphd_mots/mask.hpp"
#include "gmphd_mots/synth.hpp"
#include "gmphd_mots/tracker.hpp"
#include "gmphd_mots/viz.hpp"
