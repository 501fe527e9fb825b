#pragma once

#include "subscan/csv.hpp"
#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/pipeline.hpp"
#include "subscan/relevance.hpp"
#include "subscan/report.hpp"
#include "subscan/scan.hpp"
#include "subscan/scoring.hpp"
#include "subscan/significance.hpp"
#include "subscan/substitution.hpp"
#include "subscan/synthetic.hpp"
