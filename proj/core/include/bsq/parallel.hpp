#pragma once

#include <functional>

namespace bsq::parallel {

// Caps the worker count used by parallel_for; 0 restores the hardware default.
void set_max_threads(int n);
int max_threads();

// Runs f(i) for i in [0, n). Results must be written to disjoint slots; the
// caller reduces in index order, so output does not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace bsq::parallel
