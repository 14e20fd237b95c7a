#pragma once

#include "robgmm/core.hpp"
#include "robgmm/model.hpp"
#include "robgmm/synthdata.hpp"
#include "robgmm/agnostic.hpp"
#include "robgmm/gmm2.hpp"
#include "robgmm/em.hpp"
#include "robgmm/theory.hpp"
#include "robgmm/bench.hpp"
#include "robgmm/io.hpp"
