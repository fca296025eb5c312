#pragma once

#include "decaylab/cli/config.hpp"
#include "decaylab/cli/runner.hpp"
#include "decaylab/cli/svg.hpp"
#include "decaylab/cli/sweep.hpp"
