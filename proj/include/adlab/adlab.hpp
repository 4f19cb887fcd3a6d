#pragma once

#include "adlab/errors.hpp"
#include "adlab/kinematics.hpp"
#include "adlab/scenario.hpp"
#include "adlab/criticality.hpp"
#include "adlab/autopilot.hpp"
#include "adlab/simulator.hpp"
#include "adlab/oracle.hpp"
#include "adlab/partition.hpp"
#include "adlab/external.hpp"
#include "adlab/report.hpp"
#include "adlab/campaign.hpp"
