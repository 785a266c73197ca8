#pragma once

#include "chaossync/analysis.hpp"
#include "chaossync/commands.hpp"
#include "chaossync/controller.hpp"
#include "chaossync/run_spec.hpp"
#include "chaossync/scheme.hpp"
#include "chaossync/simulate.hpp"
#include "chaossync/state.hpp"
#include "chaossync/systems.hpp"
