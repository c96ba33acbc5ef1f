#pragma once

#include "lpmc/errors.hpp"
#include "lpmc/parallel.hpp"
#include "lpmc/lorentz.hpp"
#include "lpmc/chart.hpp"
#include "lpmc/radial_graph.hpp"
#include "lpmc/polar_grid.hpp"
#include "lpmc/prescribed_curvature.hpp"
#include "lpmc/cartesian_graph.hpp"
#include "lpmc/curvature_integrals.hpp"
#include "lpmc/pmc_solver.hpp"
#include "lpmc/identities.hpp"
#include "lpmc/report_json.hpp"
