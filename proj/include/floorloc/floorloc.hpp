#pragma once

#include "floorloc/core.hpp"
#include "floorloc/eval.hpp"
#include "floorloc/extraction.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/image.hpp"
#include "floorloc/parallel.hpp"
#include "floorloc/pose_grid.hpp"
#include "floorloc/probvolume.hpp"
#include "floorloc/raycast.hpp"
#include "floorloc/rays.hpp"
