#pragma once

#include "pinet/bench.hpp"
#include "pinet/data/karate.hpp"
#include "pinet/detect.hpp"
#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"
#include "pinet/perception.hpp"
#include "pinet/random.hpp"
#include "pinet/spectra.hpp"
