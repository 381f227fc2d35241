#pragma once

#include "kotta/autoscaler.hpp"
#include "kotta/config_file.hpp"
#include "kotta/cost_model.hpp"
#include "kotta/csv.hpp"
#include "kotta/elastic_sim.hpp"
#include "kotta/error.hpp"
#include "kotta/job_manager.hpp"
#include "kotta/lifecycle_sim.hpp"
#include "kotta/market.hpp"
#include "kotta/rbac.hpp"
#include "kotta/scenario.hpp"
#include "kotta/sim_kernel.hpp"
#include "kotta/storage.hpp"
#include "kotta/workload.hpp"
