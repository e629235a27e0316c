#pragma once

#include "scenegen/interval.hpp"
#include "scenegen/object_model.hpp"
#include "scenegen/query.hpp"
#include "scenegen/relations.hpp"
#include "scenegen/solver.hpp"
#include "scenegen/projection.hpp"
#include "scenegen/retrieval.hpp"
#include "scenegen/io.hpp"
#include "scenegen/pipeline.hpp"
