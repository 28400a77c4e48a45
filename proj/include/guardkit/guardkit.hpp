#pragma once

// Umbrella header for the guardkit zero-shot guardrail classification
// library.

#include "guardkit/augmentation.hpp"
#include "guardkit/bench.hpp"
#include "guardkit/dataset_io.hpp"
#include "guardkit/encoder.hpp"
#include "guardkit/error.hpp"
#include "guardkit/evaluation.hpp"
#include "guardkit/records.hpp"
#include "guardkit/scoring.hpp"
#include "guardkit/task_views.hpp"
#include "guardkit/taxonomy.hpp"
#include "guardkit/training.hpp"
