#pragma once

#include "qsbs/family.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qsbs {

/// Flat `key = value` files; '#' starts a comment, later keys win.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// "a,b,c" or "start:stop:step" into a numeric list.
std::vector<double> parse_number_list(const std::string& text);

std::vector<std::string> parse_name_list(const std::string& text);

Kind parse_family_kind(const std::string& name);

/// Builds the candidate grid for one family from optional nu/delta values or
/// ranges; empty strings fall back to the family's default grid.
std::vector<MixtureFamily> build_nu_grid(Kind kind, const std::string& nu_text,
                                         const std::string& delta_text);

/// Default profile grids: t on 2..30, slash on 1.5..10 by 0.5, contaminated
/// normal on {0.01..0.5 by 0.01} x {0.02..0.9 by 0.04}.
std::vector<MixtureFamily> default_nu_grid(Kind kind);

/// FNV-1a over the canonical key=value listing; embedded in every report so
/// outputs are traceable to their configuration.
std::string config_hash(const std::map<std::string, std::string>& entries);

}  // namespace qsbs
