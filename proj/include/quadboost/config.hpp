#pragma once

// Build with -DQUADBOOST_STATS=1 to enable instrumentation counters,
// transition checks, live-object accounting and double-retire detection.
#ifndef QUADBOOST_STATS
#define QUADBOOST_STATS 0
#endif

namespace quadboost {

inline constexpr bool kStatsEnabled = QUADBOOST_STATS != 0;

}  // namespace quadboost
