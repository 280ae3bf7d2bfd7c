#pragma once

#include "spotrack/assignment.hpp"
#include "spotrack/bbox.hpp"
#include "spotrack/config.hpp"
#include "spotrack/gaussian.hpp"
#include "spotrack/identify.hpp"
#include "spotrack/lp.hpp"
#include "spotrack/metrics.hpp"
#include "spotrack/mot_io.hpp"
#include "spotrack/pmbm.hpp"
#include "spotrack/report.hpp"
#include "spotrack/rfs.hpp"
#include "spotrack/simulate.hpp"
#include "spotrack/sort.hpp"
#include "spotrack/spo_model.hpp"
#include "spotrack/trajectory.hpp"
#include "spotrack/unscented.hpp"
