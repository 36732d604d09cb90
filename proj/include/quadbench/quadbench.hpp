#pragma once

// Umbrella header.

#include "quadbench/complex.hpp"
#include "quadbench/csv.hpp"
#include "quadbench/diagnostics.hpp"
#include "quadbench/heat.hpp"
#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"
#include "quadbench/report.hpp"
#include "quadbench/sobol.hpp"
