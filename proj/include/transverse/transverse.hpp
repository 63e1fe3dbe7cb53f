#ifndef TRANSVERSE_TRANSVERSE_HPP
#define TRANSVERSE_TRANSVERSE_HPP

#include "transverse/builtin.hpp"
#include "transverse/chart.hpp"
#include "transverse/chart_transition.hpp"
#include "transverse/equilibrium.hpp"
#include "transverse/errors.hpp"
#include "transverse/linalg.hpp"
#include "transverse/loop_profile.hpp"
#include "transverse/melnikov.hpp"
#include "transverse/model.hpp"
#include "transverse/numeric.hpp"
#include "transverse/riccati.hpp"

#endif  // TRANSVERSE_TRANSVERSE_HPP
