// Copyright 2026 The grouprec Authors.
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

#include "grouprec/app.hpp"
#include "grouprec/dense_matrix.hpp"
#include "grouprec/equivalence.hpp"
#include "grouprec/evaluation.hpp"
#include "grouprec/gradcheck.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/objectives.hpp"
#include "grouprec/serialization.hpp"
#include "grouprec/sparse_ops.hpp"
#include "grouprec/training.hpp"
