// qhe.hpp: umbrella header.
#pragma once

#include "qhe/qcore.hpp"
#include "qhe/dissipation.hpp"
#include "qhe/dynamics.hpp"
#include "qhe/engines.hpp"
#include "qhe/optimize.hpp"
