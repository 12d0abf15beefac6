#pragma once

#include "rppac/digraph.hpp"
#include "rppac/delay.hpp"
#include "rppac/protocol.hpp"
#include "rppac/augmented.hpp"
#include "rppac/spectral.hpp"
#include "rppac/harness.hpp"
#include "rppac/checks.hpp"
