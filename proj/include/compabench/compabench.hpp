#pragma once

#include "compabench/agents.hpp"
#include "compabench/config.hpp"
#include "compabench/dataset.hpp"
#include "compabench/error.hpp"
#include "compabench/geometry.hpp"
#include "compabench/json_io.hpp"
#include "compabench/parser.hpp"
#include "compabench/raster.hpp"
#include "compabench/render.hpp"
#include "compabench/reward.hpp"
#include "compabench/rng.hpp"
#include "compabench/scene.hpp"
#include "compabench/task.hpp"
