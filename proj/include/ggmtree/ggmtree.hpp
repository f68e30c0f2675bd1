#pragma once

#include "ggmtree/boundary_law.hpp"
#include "ggmtree/errors.hpp"
#include "ggmtree/fuzzy_operator.hpp"
#include "ggmtree/ggm_layer.hpp"
#include "ggmtree/simplex.hpp"
#include "ggmtree/simplex_dynamics.hpp"
#include "ggmtree/thresholds.hpp"
#include "ggmtree/transfer_operator.hpp"
#include "ggmtree/tree.hpp"
