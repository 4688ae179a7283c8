#pragma once

#include <filesystem>
#include <iosfwd>

#include "creweight/types.hpp"

namespace creweight {

// Text format: optional first line "#prompt <id> <id> ...", then one token id
// per line. Blank lines are ignored.
void write_sequence_text(std::ostream& out, const TokenSequence& seq);
TokenSequence read_sequence_text(std::istream& in);

// Binary format, little-endian:
//   magic "CRWSEQ\0\0" | u32 version | u32 prompt_len | u32 token_len
//   prompt_len u32 ids | token_len u32 ids
inline constexpr std::uint32_t kSequenceVersion = 1;
void write_sequence_binary(std::ostream& out, const TokenSequence& seq);
TokenSequence read_sequence_binary(std::istream& in);

/// Format chosen by extension: ".bin" is binary, anything else is text.
void save_sequence(const std::filesystem::path& path, const TokenSequence& seq);
/// Sniffs the magic bytes, so the extension does not matter on load.
TokenSequence load_sequence(const std::filesystem::path& path);

/// Throws InvalidInput when any id (prompt or tokens) is >= vocab_size.
void check_token_range(const TokenSequence& seq, std::size_t vocab_size);

}  // namespace creweight
