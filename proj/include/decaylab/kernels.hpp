#pragma once

#include "decaylab/kernels/heat_kernel.hpp"
#include "decaylab/kernels/recurrence.hpp"
#include "decaylab/kernels/report.hpp"
#include "decaylab/kernels/validate.hpp"
#include "decaylab/kernels/walk.hpp"
