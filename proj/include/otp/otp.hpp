#pragma once

#include "otp/antider.hpp"
#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/matrix.hpp"
#include "otp/metric.hpp"
#include "otp/monotone.hpp"
#include "otp/potential.hpp"
#include "otp/pricing.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"
#include "otp/transport.hpp"
