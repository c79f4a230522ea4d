// Copyright 2026 The stli Authors
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

// Umbrella header.

#ifndef STLI_STLI_HPP
#define STLI_STLI_HPP

#include "stli/abc/gp.hpp"
#include "stli/abc/gps_abc.hpp"
#include "stli/abc/simulator.hpp"
#include "stli/abc/synthetic_likelihood.hpp"
#include "stli/chain.hpp"
#include "stli/dsgld/dsgld.hpp"
#include "stli/errors.hpp"
#include "stli/lsnr/lsnr.hpp"
#include "stli/mh/austerity.hpp"
#include "stli/mh/proposal.hpp"
#include "stli/models/csv.hpp"
#include "stli/models/dataset.hpp"
#include "stli/models/minibatch.hpp"
#include "stli/models/objective.hpp"
#include "stli/models/synthetic.hpp"
#include "stli/numerics/distributions.hpp"
#include "stli/numerics/linalg.hpp"
#include "stli/numerics/rng.hpp"
#include "stli/sgd/adaptive_sgd.hpp"
#include "stli/sgld/sgld.hpp"
#include "stli/version.hpp"

#endif  // STLI_STLI_HPP
