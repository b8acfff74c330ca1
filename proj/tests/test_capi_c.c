// Copyright 2026 The rmtlab Authors.
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

/* The public header must compile as plain C. */
#include <stdio.h>

#include "rmtlab/rmtlab.h"

int main(void) {
  double v = 0.0;
  if (rmtlab_digamma(1.0, &v) != RMTLAB_OK) return 1;
  printf("rmtlab %s digamma(1) = %.12f\n", rmtlab_version(), v);
  return v < -0.577 && v > -0.578 ? 0 : 1;
}
