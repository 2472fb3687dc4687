// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace emr {

// 0 or negative requests the library default (all hardware threads).
int resolve_threads(int requested);

// Runs fn(i) for i in [0, n). threads == 1 takes the plain serial loop, the
// reference path the determinism tests compare against. Work items must be
// independent; exceptions are captured and rethrown after the loop.
void for_each_index(int n, int threads, const std::function<void(int)>& fn);

}  // namespace emr
