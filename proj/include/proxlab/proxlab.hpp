#pragma once

#include "proxlab/core.hpp"
#include "proxlab/norm.hpp"
#include "proxlab/geometry.hpp"
#include "proxlab/sets.hpp"
#include "proxlab/projection.hpp"
#include "proxlab/differentiability.hpp"
#include "proxlab/scenario.hpp"
