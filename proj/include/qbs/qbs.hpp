// qbs.hpp — umbrella header

#pragma once

#include "qbs/analytic.hpp"
#include "qbs/checks.hpp"
#include "qbs/commands.hpp"
#include "qbs/errors.hpp"
#include "qbs/io.hpp"
#include "qbs/langevin.hpp"
#include "qbs/lindblad.hpp"
#include "qbs/model.hpp"
#include "qbs/ode.hpp"
#include "qbs/parallel.hpp"
#include "qbs/phase_space.hpp"
#include "qbs/quadrature.hpp"
#include "qbs/rng.hpp"
#include "qbs/spectroscopy.hpp"
#include "qbs/stats.hpp"
