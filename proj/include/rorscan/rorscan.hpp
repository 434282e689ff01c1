#pragma once

// Umbrella header: the full read-only reentrancy detection engine.

#include "rorscan/analysis.hpp"
#include "rorscan/boundary.hpp"
#include "rorscan/ir.hpp"
#include "rorscan/ir_meta.hpp"
#include "rorscan/pipeline.hpp"
#include "rorscan/remote.hpp"
#include "rorscan/snapshot.hpp"
#include "rorscan/store.hpp"
#include "rorscan/types.hpp"
#include "rorscan/u256.hpp"
#include "rorscan/verifier.hpp"
#include "rorscan/vm.hpp"
