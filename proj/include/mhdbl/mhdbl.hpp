#pragma once

#include "mhdbl/calculus.hpp"
#include "mhdbl/checkpoint.hpp"
#include "mhdbl/commands.hpp"
#include "mhdbl/config.hpp"
#include "mhdbl/energy.hpp"
#include "mhdbl/error.hpp"
#include "mhdbl/field.hpp"
#include "mhdbl/grid.hpp"
#include "mhdbl/initial_data.hpp"
#include "mhdbl/solver.hpp"
#include "mhdbl/unknowns.hpp"
#include "mhdbl/verification.hpp"
#include "mhdbl/weights.hpp"
