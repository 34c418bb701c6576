#pragma once

// JSON forms of the reports and transcripts.

#include <json.hpp>

#include "bounds.hpp"
#include "protocol.hpp"
#include "squash.hpp"

namespace e91 {

inline constexpr const char* kTranscriptSchema = "e91squash.transcript/1";

nlohmann::json to_json(Cplx z);
nlohmann::json to_json(const ProtocolParams& p);
// Inverse of to_json(ProtocolParams); N and l_smp are re-derived and checked.
ProtocolParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KeyLengthReport& r);
nlohmann::json to_json(const AbortBound& b);
nlohmann::json to_json(const SquashReport& r);
nlohmann::json to_json(const NoiseReport& r);
nlohmann::json to_json(const AbortExperimentReport& r);

// Per-pulse data is stored column-wise as strings: labels 'm' (smp) / 's'
// (sif), bases 'z' / 'x' / 'p' (z'), outcomes '+' / '-'. Bit strings are hex,
// little-endian within bytes.
nlohmann::json to_json(const Transcript& t, bool include_pulses = true);

}  // namespace e91
