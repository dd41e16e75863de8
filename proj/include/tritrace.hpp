// Copyright 2026 The tritrace Authors
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

#include "tritrace/circuits.hpp"
#include "tritrace/compensated_sum.hpp"
#include "tritrace/config.hpp"
#include "tritrace/covariance.hpp"
#include "tritrace/deviations.hpp"
#include "tritrace/ensembles.hpp"
#include "tritrace/error.hpp"
#include "tritrace/io.hpp"
#include "tritrace/laws.hpp"
#include "tritrace/moments.hpp"
#include "tritrace/montecarlo.hpp"
#include "tritrace/normality.hpp"
#include "tritrace/parallel.hpp"
#include "tritrace/rng.hpp"
#include "tritrace/summand.hpp"
#include "tritrace/tridiagonal.hpp"
#include "tritrace/version.hpp"
