/*
 * Copyright 2026 The irsfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Per-device virtual energy-deficit queues of the online scheme.
#ifndef IRSFL_ENERGY_QUEUES_H_
#define IRSFL_ENERGY_QUEUES_H_

#include "irsfl/linalg.h"

namespace irsfl {

struct EnergyQueues {
  RVec e;      // joules, elementwise >= 0
  RVec p_avg;  // watts
  int d = 1;
};

}  // namespace irsfl

#endif  // IRSFL_ENERGY_QUEUES_H_
