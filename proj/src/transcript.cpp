#include "elicit/transcript.hpp"

#include <sstream>

#include "elicit/error.hpp"

namespace elicit {

std::string save_transcript(const Session& session, bool with_snapshot) {
  std::string out = canonical_dump({{"schema", kTranscriptSchema},
                                    {"version", kTranscriptVersion},
                                    {"seed", session.seed()}});
  out += '\n';
  for (const auto& e : session.events()) {
    out += canonical_dump(e.to_json());
    out += '\n';
  }
  if (with_snapshot) {
    out += canonical_dump({{"snapshot", session.snapshot()}});
    out += '\n';
  }
  return out;
}

namespace {

json parse_line(const std::string& line, const std::string& where) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, where + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace

Session load_and_replay(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "transcript: empty input",
          ErrorKind::parse);
  const json header = parse_line(line, "transcript header");
  require(header.is_object() && header.value("schema", "") == kTranscriptSchema,
          "transcript header: unknown schema", ErrorKind::parse);
  require(header.contains("version") && header["version"].is_number_integer(),
          "transcript header: missing version", ErrorKind::parse);
  const int version = header["version"].get<int>();
  require(version <= kTranscriptVersion,
          "transcript header: version " + std::to_string(version) +
              " is newer than supported version " +
              std::to_string(kTranscriptVersion),
          ErrorKind::parse);
  require(version >= 1, "transcript header: invalid version", ErrorKind::parse);
  require(header.contains("seed") && header["seed"].is_number_unsigned(),
          "transcript header: missing seed", ErrorKind::parse);
  Session session(header["seed"].get<std::uint64_t>());

  int index = 0;
  bool snapshot_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    require(!snapshot_seen, "transcript: content after the snapshot line",
            ErrorKind::parse);
    ++index;
    const std::string where = "transcript event " + std::to_string(index);
    const json j = parse_line(line, where);
    if (j.is_object() && j.contains("snapshot")) {
      snapshot_seen = true;
      require(canonical_dump(j["snapshot"]) == canonical_dump(session.snapshot()),
              "transcript: final snapshot does not match replay", ErrorKind::parse);
      continue;
    }
    EventRecord rec;
    try {
      rec = EventRecord::from_json(j);
    } catch (const Error& e) {
      fail(ErrorKind::parse, where + ": " + e.what());
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, where + ": " + e.what());
    }
    require(rec.seq == index, where + ": sequence number out of order",
            ErrorKind::parse);
    EventRecord got;
    try {
      got = session.apply({rec.op, rec.inputs, rec.id, rec.timestamp, rec.synthetic});
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what(), e.admissible());
    }
    require(got.accepted == rec.accepted && got.phase == rec.phase &&
                canonical_dump(got.deltas) == canonical_dump(rec.deltas),
            where + ": replay does not reproduce the recorded deltas",
            ErrorKind::parse);
  }
  return session;
}

const std::string& transcript_schema() {
  static const std::string schema = R"schema({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "elicit session transcript (one JSON object per line)",
  "oneOf": [
    {
      "title": "header (first line)",
      "type": "object",
      "required": ["schema", "version", "seed"],
      "properties": {
        "schema": {"const": "elicit.transcript"},
        "version": {"const": 1},
        "seed": {"type": "integer", "minimum": 0}
      }
    },
    {
      "title": "event",
      "type": "object",
      "required": ["seq", "id", "timestamp", "phase", "op", "inputs", "accepted", "deltas", "synthetic"],
      "properties": {
        "seq": {"type": "integer", "minimum": 1},
        "id": {"type": "string"},
        "timestamp": {"type": "string"},
        "phase": {"type": "string"},
        "op": {"enum": ["setup", "assess_dispersion", "set_dispersion", "assess_power",
                        "assess_marginal", "choose_conditioning",
                        "assess_conditional_median", "truncate", "conclude", "induce"]},
        "inputs": {"type": "object"},
        "accepted": {"type": "boolean"},
        "deltas": {"type": "object", "required": ["phase_after"]},
        "synthetic": {"type": "boolean"}
      }
    },
    {
      "title": "snapshot (optional last line)",
      "type": "object",
      "required": ["snapshot"]
    }
  ]
}
)schema";
  return schema;
}

}  // namespace elicit
