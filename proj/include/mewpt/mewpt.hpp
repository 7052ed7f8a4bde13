#pragma once

#include "mewpt/bvd.hpp"
#include "mewpt/bvd_fit.hpp"
#include "mewpt/errors.hpp"
#include "mewpt/io.hpp"
#include "mewpt/pmu.hpp"
#include "mewpt/pmu_config.hpp"
#include "mewpt/rectifier.hpp"
#include "mewpt/rsc.hpp"
#include "mewpt/scenario.hpp"
#include "mewpt/sim.hpp"
#include "mewpt/transient.hpp"
#include "mewpt/version.hpp"
