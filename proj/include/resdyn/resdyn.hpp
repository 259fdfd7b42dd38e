// resdyn.hpp: umbrella header

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/form_factor.hpp"
#include "resdyn/quadrature.hpp"
#include "resdyn/model.hpp"
#include "resdyn/reservoir.hpp"
#include "resdyn/bohr.hpp"
#include "resdyn/level_shift.hpp"
#include "resdyn/parallel.hpp"
#include "resdyn/resonances.hpp"
#include "resdyn/dynamics.hpp"
#include "resdyn/register.hpp"
#include "resdyn/oracle.hpp"
