#pragma once

#include "pinlayer/branch.hpp"
#include "pinlayer/config.hpp"
#include "pinlayer/errors.hpp"
#include "pinlayer/evans.hpp"
#include "pinlayer/layer.hpp"
#include "pinlayer/model.hpp"
#include "pinlayer/report.hpp"
#include "pinlayer/simulate.hpp"
#include "pinlayer/spectrum.hpp"
#include "pinlayer/steady.hpp"
#include "pinlayer/validate.hpp"
