#pragma once

#include "hdlmutant/ast.hpp"
#include "hdlmutant/sim.hpp"
#include "hdlmutant/testbench.hpp"

namespace refsim {

/// Brute-force interpreter used as a test oracle. Every settle re-runs all
/// continuous assigns and combinational blocks until nothing changes, and
/// expression sizing is re-derived from the language rules without the
/// library's semantics helpers. Throws std::runtime_error on a loop.
hdlmutant::Trace run(const hdlmutant::ModuleAst& design, const hdlmutant::TestbenchAst& tb);

}  // namespace refsim
