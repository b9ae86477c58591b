#pragma once

#include "surrogacy/cart.hpp"
#include "surrogacy/dataset.hpp"
#include "surrogacy/diagnostics.hpp"
#include "surrogacy/emit.hpp"
#include "surrogacy/ensemble.hpp"
#include "surrogacy/error.hpp"
#include "surrogacy/report.hpp"
#include "surrogacy/roc.hpp"
#include "surrogacy/serialize.hpp"
#include "surrogacy/version.hpp"
