#pragma once

#include "decaylab/decay/catalog.hpp"
#include "decaylab/decay/fit.hpp"
#include "decaylab/decay/report.hpp"
