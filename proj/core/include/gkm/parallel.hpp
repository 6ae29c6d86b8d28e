#pragma once

namespace gkm {

// Worker count used by the parallel loops (row-wise RHS evaluation, cell
// averaging, edge sampling, trial ensembles). Results do not depend on it.
void set_threads(int threads);
int threads();

}  // namespace gkm
