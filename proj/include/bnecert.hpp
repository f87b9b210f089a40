// Copyright 2026 The bnecert Authors
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


// Umbrella header for the whole library.

#pragma once

#include "bnecert/certify.hpp"
#include "bnecert/discretize.hpp"
#include "bnecert/driver.hpp"
#include "bnecert/enum_oracle.hpp"
#include "bnecert/error.hpp"
#include "bnecert/expr.hpp"
#include "bnecert/matrix.hpp"
#include "bnecert/model.hpp"
#include "bnecert/parallel.hpp"
#include "bnecert/quadrature.hpp"
#include "bnecert/simplex.hpp"
#include "bnecert/solver.hpp"
