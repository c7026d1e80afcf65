#pragma once

#include "qdd/actuator.hpp"
#include "qdd/catalog.hpp"
#include "qdd/dyno_sim.hpp"
#include "qdd/errors.hpp"
#include "qdd/first_order.hpp"
#include "qdd/inertia.hpp"
#include "qdd/linear_fit.hpp"
#include "qdd/motor.hpp"
#include "qdd/stall.hpp"
#include "qdd/timeseries.hpp"
#include "qdd/uncertain.hpp"
#include "qdd/welch.hpp"
