#pragma once

#include "gsrcpd/error.hpp"
#include "gsrcpd/observation.hpp"
#include "gsrcpd/rng.hpp"
#include "gsrcpd/parallel.hpp"
#include "gsrcpd/graphkit.hpp"
#include "gsrcpd/gsr_stats.hpp"
#include "gsrcpd/specialfn.hpp"
#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "gsrcpd/theory.hpp"
#include "gsrcpd/simlab.hpp"
#include "gsrcpd/io.hpp"
