#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "resalloc/protocol.hpp"

namespace resalloc {

/// Canonical byte encoding of a global state: fixed field order, sets and
/// maps emitted sorted. Two states are equal iff their encodings are equal.
std::string canonical_bytes(const GlobalState& st);

/// 64-bit FNV-1a over the canonical encoding. Stable across platforms.
std::uint64_t state_hash(const GlobalState& st);

std::uint64_t fnv1a64(const std::string& bytes);

std::string to_string(const StepId& step);
bool parse_step(const std::string& text, StepId* out);

std::string to_string(const MessageValue& v);
bool parse_message_value(const std::string& text, MessageKey key,
                         MessageValue* out);

std::string mask_to_string(Mask m, char prefix);  // "{p0,p2}" / "{}"
bool parse_mask(const std::string& text, Mask* out);

std::string hash_to_hex(std::uint64_t h);
bool parse_hex64(const std::string& text, std::uint64_t* out);

}  // namespace resalloc
