#pragma once

#include "decaylab/operators/api.hpp"
#include "decaylab/operators/discrete.hpp"
#include "decaylab/operators/spec.hpp"
