#pragma once

#include "apm/ann.hpp"
#include "apm/bench.hpp"
#include "apm/bodies.hpp"
#include "apm/canonical.hpp"
#include "apm/ellipsoid.hpp"
#include "apm/halfspace.hpp"
#include "apm/hierarchy.hpp"
#include "apm/io.hpp"
#include "apm/lp.hpp"
#include "apm/macbeath.hpp"
#include "apm/oracle.hpp"
#include "apm/polytope.hpp"
#include "apm/query.hpp"
#include "apm/rng.hpp"
#include "apm/svg.hpp"
#include "apm/types.hpp"
