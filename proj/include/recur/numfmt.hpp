#pragma once

#include <string>

namespace recur {

// Fixed 6-significant-digit formatting for all computed values in emitted
// artifacts; keeps golden-file comparisons stable.
std::string fmt_num(double v);

// Shortest round-trip representation; used when re-serializing ingested data
// so that ingest -> write -> ingest is bit-identical.
std::string fmt_exact(double v);

} // namespace recur
