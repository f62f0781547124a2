#pragma once

// Umbrella header.

#include "dbnd/data.hpp"
#include "dbnd/dbn.hpp"
#include "dbnd/denoise.hpp"
#include "dbnd/enumeration.hpp"
#include "dbnd/eval.hpp"
#include "dbnd/rbm.hpp"
#include "dbnd/rng.hpp"
#include "dbnd/synth.hpp"
