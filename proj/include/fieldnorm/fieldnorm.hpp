#pragma once

#include "fieldnorm/citing_side.hpp"
#include "fieldnorm/corpus.hpp"
#include "fieldnorm/csv.hpp"
#include "fieldnorm/errors.hpp"
#include "fieldnorm/fairness.hpp"
#include "fieldnorm/linearity.hpp"
#include "fieldnorm/normalizers.hpp"
#include "fieldnorm/score_set.hpp"
#include "fieldnorm/synthesis.hpp"
