#pragma once

#include "pinch/scenario.hpp"
#include "pinch/channel.hpp"
#include "pinch/noma.hpp"
#include "pinch/activation.hpp"
#include "pinch/harness.hpp"
