#pragma once

// Line-delimited JSON transcript of a session: a header line, one line per
// event and an optional final snapshot line, all in canonical JSON.

#include <string>

#include "elicit/session.hpp"

namespace elicit {

inline constexpr int kTranscriptVersion = 1;
inline constexpr const char* kTranscriptSchema = "elicit.transcript";

std::string save_transcript(const Session& session, bool with_snapshot = true);

/// Rebuilds a session by applying every event in order and checking each
/// event's recorded deltas (and the snapshot, when present). Errors name the
/// 1-based event index; future schema versions are rejected.
Session load_and_replay(const std::string& text);

/// JSON schema of the transcript lines.
const std::string& transcript_schema();

}  // namespace elicit
