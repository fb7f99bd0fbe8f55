#pragma once

#include "cmdp/bench.hpp"
#include "cmdp/error.hpp"
#include "cmdp/explicit.hpp"
#include "cmdp/ext_nat.hpp"
#include "cmdp/gen.hpp"
#include "cmdp/graph.hpp"
#include "cmdp/io.hpp"
#include "cmdp/model.hpp"
#include "cmdp/selector.hpp"
#include "cmdp/solvers.hpp"
#include "cmdp/strategy.hpp"
