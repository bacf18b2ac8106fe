// Copyright 2026 The fogmarket Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "fogmarket/admm.hpp"
#include "fogmarket/baselines.hpp"
#include "fogmarket/equilibrium.hpp"
#include "fogmarket/fairness.hpp"
#include "fogmarket/io.hpp"
#include "fogmarket/market.hpp"
#include "fogmarket/pareto.hpp"
#include "fogmarket/privacy.hpp"
#include "fogmarket/scenario.hpp"
#include "fogmarket/verify.hpp"
