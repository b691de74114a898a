// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

// Extraction of the four-field answer schema from raw model text:
//
//   <ref_think>...</ref_think> <ref>...</ref> <score_think>...</score_think> <score>...</score>
//
// Parsing is total. Anything unexpected becomes a FormatViolation; text outside
// the tags is ignored.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "progbench/core.hpp"

namespace progbench {

enum class Schema { full, direct };

Schema schema_from_string(std::string_view s);

struct ScoreLiteral {
    ScoreAnswer value = ScoreAnswer::malformed();
    std::vector<FormatViolation> violations;
    std::vector<std::string> notes;
};

struct RefLiteral {
    RefAnswer value = RefAnswer::malformed();
    std::vector<FormatViolation> violations;
};

/// Number with optional '%' or an abstention literal (n/a, na, N/A). Values
/// outside [0,100] are clamped with OutOfRangeClamped; a bare decimal <= 1.0
/// without '%' is read as a fraction and scaled by 100 (FractionReinterpreted note).
ScoreLiteral parse_score_literal(std::string_view s);

/// Positive step number, optionally prefixed ("No. 5", "Step 5"). n_steps <= 0
/// disables the upper bound.
RefLiteral parse_ref_literal(std::string_view s, int n_steps);

/// n_steps bounds the <ref> value when known (> 0).
ParsedPrediction parse_response(std::string_view raw, Schema schema = Schema::full, int n_steps = 0);

/// Inverse of parse_response for well-formed predictions.
std::string render_prediction(const ParsedPrediction& p, Schema schema = Schema::full);

/// Field-wise equality ignoring raw_text.
bool equivalent(const ParsedPrediction& a, const ParsedPrediction& b);

}  // namespace progbench
