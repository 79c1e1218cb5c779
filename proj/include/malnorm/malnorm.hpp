#pragma once

#include "malnorm/basis.hpp"
#include "malnorm/construction.hpp"
#include "malnorm/core/errors.hpp"
#include "malnorm/core/general_eig.hpp"
#include "malnorm/core/lanczos.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/core/matrix_io.hpp"
#include "malnorm/core/polar.hpp"
#include "malnorm/core/symmetric_eig.hpp"
#include "malnorm/ensembles.hpp"
#include "malnorm/expanders.hpp"
#include "malnorm/experiments/campaign.hpp"
#include "malnorm/experiments/cloud.hpp"
#include "malnorm/experiments/json_text.hpp"
#include "malnorm/experiments/stats.hpp"
#include "malnorm/malnormality.hpp"
#include "malnorm/random.hpp"
#include "malnorm/report.hpp"
#include "malnorm/selftest.hpp"
