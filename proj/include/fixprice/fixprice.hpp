#pragma once

#include "fixprice/bilateral.hpp"
#include "fixprice/dist.hpp"
#include "fixprice/double_auction.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/instances.hpp"
#include "fixprice/io.hpp"
#include "fixprice/report.hpp"
#include "fixprice/rng.hpp"
#include "fixprice/trade.hpp"
