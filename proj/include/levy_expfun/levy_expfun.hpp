#pragma once

#include "errors.hpp"
#include "model.hpp"
#include "potential.hpp"
#include "wienerhopf.hpp"
#include "random.hpp"
#include "montecarlo.hpp"
#include "density.hpp"
#include "moments.hpp"
#include "asymptotics.hpp"
#include "stats.hpp"
#include "model_io.hpp"
