#pragma once

#include "decaylab/domain/field.hpp"
#include "decaylab/domain/grid.hpp"
#include "decaylab/domain/norms.hpp"
