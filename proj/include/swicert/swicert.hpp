#pragma once

#include "swicert/certifier.hpp"
#include "swicert/densities.hpp"
#include "swicert/error.hpp"
#include "swicert/expression.hpp"
#include "swicert/family.hpp"
#include "swicert/graph.hpp"
#include "swicert/matops.hpp"
#include "swicert/matrix.hpp"
#include "swicert/siggen.hpp"
#include "swicert/signal.hpp"
#include "swicert/simulator.hpp"
