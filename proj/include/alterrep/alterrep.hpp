#pragma once

#include "alterrep/error.hpp"
#include "alterrep/subspace.hpp"
#include "alterrep/random.hpp"
#include "alterrep/probe.hpp"
#include "alterrep/inlp.hpp"
#include "alterrep/counterfactual.hpp"
#include "alterrep/synthlab.hpp"
#include "alterrep/grammar.hpp"
#include "alterrep/metrics.hpp"
#include "alterrep/repio.hpp"
