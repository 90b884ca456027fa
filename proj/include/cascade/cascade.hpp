#pragma once

#include "cascade/config.hpp"
#include "cascade/divsolve.hpp"
#include "cascade/geometry.hpp"
#include "cascade/lift.hpp"
#include "cascade/manufactured.hpp"
#include "cascade/mesh.hpp"
#include "cascade/mesh_io.hpp"
#include "cascade/norms.hpp"
#include "cascade/output.hpp"
#include "cascade/solver.hpp"
#include "cascade/study.hpp"
