#pragma once

#include "nct/theta.hpp"
#include "nct/torus_element.hpp"
#include "nct/gns.hpp"
#include "nct/report.hpp"
#include "nct/random.hpp"
#include "nct/symbol.hpp"
#include "nct/calculus.hpp"
#include "nct/sobolev.hpp"
#include "nct/module.hpp"
#include "nct/oscillatory.hpp"
#include "nct/io.hpp"
#include "nct/harness.hpp"
