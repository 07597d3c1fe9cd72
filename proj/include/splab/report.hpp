#pragma once

#include "splab/audits.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace splab {

using json = nlohmann::ordered_json;

json to_json(const Params& prm);
json to_json(const SolverConfig& cfg);
json to_json(const Ledger& L);
json to_json(const SolveReport& rep);
json to_json(const AuditOutcome& o);

std::string to_string(SeedProfile s);
SeedProfile seed_profile_from(const std::string& s);

// r,u1,u2 table of a solution pair.
void write_pair_csv(const Pair& u, std::ostream& os);
// name,passed,measured,expected,tolerance
void write_audit_csv(const std::vector<AuditOutcome>& audits, std::ostream& os);

// Writes text to path, creating parent directories; throws std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

// File-name-safe form of a label.
std::string slug(const std::string& label);

}  // namespace splab
