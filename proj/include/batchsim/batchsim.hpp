#pragma once

// Everything except the viewer bridge (which needs OpenSSL and the vendored
// JSON header): include "batchsim/viewer/server.hpp" for that.

#include "batchsim/batch.hpp"
#include "batchsim/bench.hpp"
#include "batchsim/env.hpp"
#include "batchsim/parallel.hpp"
#include "batchsim/registry.hpp"
#include "batchsim/rollout.hpp"
#include "batchsim/scenario.hpp"
#include "batchsim/sensors.hpp"
#include "batchsim/world.hpp"
