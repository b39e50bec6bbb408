#pragma once

#include "algmech/core.hpp"
#include "algmech/report.hpp"
#include "algmech/algebroid.hpp"
#include "algmech/cartan.hpp"
#include "algmech/symplectic.hpp"
#include "algmech/prolongation.hpp"
#include "algmech/dynamics.hpp"
#include "algmech/reduction.hpp"
#include "algmech/models.hpp"
#include "algmech/suite.hpp"
#include "algmech/expression.hpp"
#include "algmech/config.hpp"
