#pragma once

#include "graspid/vec3.hpp"
#include "graspid/rng.hpp"
#include "graspid/mesh.hpp"
#include "graspid/fixtures.hpp"
#include "graspid/grasp.hpp"
#include "graspid/features.hpp"
#include "graspid/recognizer.hpp"
#include "graspid/explore.hpp"
#include "graspid/harness.hpp"
#include "graspid/svgplot.hpp"
