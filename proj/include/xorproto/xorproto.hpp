#pragma once

#include "xorproto/term.hpp"
#include "xorproto/substitution.hpp"
#include "xorproto/term_algebra.hpp"
#include "xorproto/unify_elementary.hpp"
#include "xorproto/unify_combined.hpp"
#include "xorproto/protocol.hpp"
#include "xorproto/dsl.hpp"
#include "xorproto/nut.hpp"
#include "xorproto/constraints.hpp"
#include "xorproto/attack.hpp"
#include "xorproto/corpus.hpp"
#include "xorproto/report.hpp"
