#pragma once
// Umbrella header for the whole toolkit.

#include "ltspin/config.hpp"
#include "ltspin/gauge.hpp"
#include "ltspin/growth.hpp"
#include "ltspin/longrange.hpp"
#include "ltspin/manifest.hpp"
#include "ltspin/mw.hpp"
#include "ltspin/offspring.hpp"
#include "ltspin/potential.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/spin.hpp"
#include "ltspin/stats.hpp"
#include "ltspin/table.hpp"
#include "ltspin/textio.hpp"
#include "ltspin/torus.hpp"
#include "ltspin/tree.hpp"
#include "ltspin/triangulation.hpp"
#include "ltspin/version.hpp"
