#pragma once

#include "liqdem/errors.hpp"
#include "liqdem/generators.hpp"
#include "liqdem/graph.hpp"
#include "liqdem/influence.hpp"
#include "liqdem/io.hpp"
#include "liqdem/lottery.hpp"
#include "liqdem/overlay.hpp"
#include "liqdem/suspendible.hpp"
