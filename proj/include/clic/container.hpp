#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "clic/types.hpp"

namespace clic {

/// Versioned binary container shared by datasets, polynomial coefficients
/// and trained networks.
///
/// Layout (all integers little-endian):
///   8 bytes   magic "CLICBIN1"
///   4 bytes   kind tag, e.g. "DSET"
///   u32       format version
///   u64       total file length in bytes
///   u64       metadata length, then UTF-8 JSON metadata
///   u32       array count
///   per array: u32 name length, name bytes, u64 element count,
///              IEEE-754 binary64 elements (complex data interleaved I/Q)
///   u32       CRC-32 of every preceding byte
namespace container {

inline constexpr std::uint32_t kFormatVersion = 1;

struct Document {
	std::string kind;
	std::string metadata;
	std::map<std::string, std::vector<double>> arrays;

	bool operator==(const Document &) const = default;
};

class FormatError : public Error
{
public:
	enum class Kind { BadMagic, Version, Truncated, Checksum, Schema, Io };

	FormatError(Kind kind, const std::string &what) : Error(what), _kind(kind) {}

	Kind kind() const { return _kind; }

private:
	Kind _kind;
};

std::vector<std::uint8_t> encode(const Document &doc, std::uint32_t version = kFormatVersion);
Document decode(const std::vector<std::uint8_t> &bytes, const std::string &expected_kind);

/// Writes to a temporary sibling and renames it into place.
void writeFileAtomic(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes);
void writeFileAtomic(const std::filesystem::path &path, const std::string &text);
std::vector<std::uint8_t> readFile(const std::filesystem::path &path);

std::vector<double> interleave(const MultiSequence &streams);
MultiSequence deinterleave(const std::vector<double> &flat, std::size_t n_streams);

/// Fetches a named array or throws FormatError::Schema.
const std::vector<double> &array(const Document &doc, const std::string &name);

} // namespace container
} // namespace clic
