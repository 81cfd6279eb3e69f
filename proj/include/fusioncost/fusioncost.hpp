#pragma once

#include "fusioncost/cost_model.hpp"
#include "fusioncost/errors.hpp"
#include "fusioncost/fusion_core.hpp"
#include "fusioncost/json_io.hpp"
#include "fusioncost/oracle.hpp"
#include "fusioncost/planner.hpp"
#include "fusioncost/simulator.hpp"
#include "fusioncost/verify.hpp"
