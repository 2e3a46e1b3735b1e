#pragma once

#include "bmda/audit_stats.hpp"
#include "bmda/behavior.hpp"
#include "bmda/discrete.hpp"
#include "bmda/election.hpp"
#include "bmda/errors.hpp"
#include "bmda/events.hpp"
#include "bmda/fileio.hpp"
#include "bmda/manifest.hpp"
#include "bmda/monitor.hpp"
#include "bmda/outcome.hpp"
#include "bmda/policy.hpp"
#include "bmda/report.hpp"
#include "bmda/rng.hpp"
#include "bmda/scenario.hpp"
#include "bmda/script.hpp"
#include "bmda/sim.hpp"
#include "bmda/spoilage.hpp"
#include "bmda/strategy.hpp"
#include "bmda/version.hpp"
