#pragma once

// Umbrella header.

#include "namelink/ensemble.hpp"
#include "namelink/error.hpp"
#include "namelink/features.hpp"
#include "namelink/mlp.hpp"
#include "namelink/model.hpp"
#include "namelink/protocol.hpp"
#include "namelink/records.hpp"
#include "namelink/rprop.hpp"
#include "namelink/string_metrics.hpp"
#include "namelink/synthetic.hpp"
#include "namelink/text.hpp"
