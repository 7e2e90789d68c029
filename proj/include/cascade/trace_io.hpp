#pragma once

#include <string>

#include "cascade/trace.hpp"

namespace cascade {

// JSON-lines trace file. The first line is a meta record
// {"format":"cascade-traces","version":1}; each following line is one trace:
// {"trace_id","label","events":[{"parent":int,"type":int|null,
//  "xu":[...]|null,"xv":[...]|null}]}. read(write(T)) == T field for field.
void write_traces(const TraceSet& traces, const std::string& path);

// Throws std::runtime_error with the offending line number on malformed input.
TraceSet read_traces(const std::string& path);

// Flat export for plotting: one event per row.
void write_traces_csv(const TraceSet& traces, const std::string& path);

}  // namespace cascade
