#ifndef CMX_CMX_HPP
#define CMX_CMX_HPP

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"
#include "cmx/feasibility.hpp"
#include "cmx/identify.hpp"
#include "cmx/maxent.hpp"
#include "cmx/reciprocal.hpp"

#endif // CMX_CMX_HPP
