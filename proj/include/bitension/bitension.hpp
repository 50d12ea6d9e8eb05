#pragma once

#include "bitension/biharmonic.hpp"
#include "bitension/chart.hpp"
#include "bitension/error.hpp"
#include "bitension/expr.hpp"
#include "bitension/extrinsic.hpp"
#include "bitension/fd_oracle.hpp"
#include "bitension/jet.hpp"
#include "bitension/parallel.hpp"
#include "bitension/report.hpp"
#include "bitension/scan.hpp"
