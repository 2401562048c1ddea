#include "clic/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <zlib.h>

namespace clic::container {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'I', 'C', 'B', 'I', 'N', '1'};

// magic, kind, version, total length
constexpr std::size_t kLengthOffset = sizeof(kMagic) + 4 + 4;
constexpr std::size_t kHeaderSize = kLengthOffset + 8;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

class Writer
{
public:
	void raw(const void *data, std::size_t n)
	{
		const auto *p = static_cast<const std::uint8_t *>(data);
		bytes.insert(bytes.end(), p, p + n);
	}

	template <typename T>
	void pod(T v) { raw(&v, sizeof(T)); }

	std::vector<std::uint8_t> bytes;
};

class Reader
{
public:
	Reader(const std::uint8_t *data, std::size_t size) : _data(data), _size(size) {}

	void raw(void *out, std::size_t n)
	{
		if (n > _size - _pos) {
			throw FormatError(FormatError::Kind::Truncated, "container: truncated file");
		}

		std::memcpy(out, _data + _pos, n);
		_pos += n;
	}

	template <typename T>
	T pod()
	{
		T v;
		raw(&v, sizeof(T));
		return v;
	}

	std::size_t remaining() const { return _size - _pos; }

private:
	const std::uint8_t *_data;
	std::size_t _size;
	std::size_t _pos{0};
};

std::uint32_t crc(const std::uint8_t *data, std::size_t n)
{
	return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

} // namespace

std::vector<std::uint8_t> encode(const Document &doc, std::uint32_t version)
{
	require(doc.kind.size() == 4, "container: kind tag must be 4 bytes");

	Writer w;
	w.raw(kMagic, sizeof(kMagic));
	w.raw(doc.kind.data(), 4);
	w.pod<std::uint32_t>(version);
	w.pod<std::uint64_t>(0); // total length, patched below
	w.pod<std::uint64_t>(doc.metadata.size());
	w.raw(doc.metadata.data(), doc.metadata.size());
	w.pod<std::uint32_t>(static_cast<std::uint32_t>(doc.arrays.size()));

	for (const auto &[name, values] : doc.arrays) {
		w.pod<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
		w.raw(name.data(), name.size());
		w.pod<std::uint64_t>(values.size());
		w.raw(values.data(), values.size() * sizeof(double));
	}

	const std::uint64_t total = w.bytes.size() + 4;
	std::memcpy(w.bytes.data() + kLengthOffset, &total, sizeof(total));
	w.pod<std::uint32_t>(crc(w.bytes.data(), w.bytes.size()));
	return std::move(w.bytes);
}

Document decode(const std::vector<std::uint8_t> &bytes, const std::string &expected_kind)
{
	using K = FormatError::Kind;

	if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
		throw FormatError(K::BadMagic, "container: not a CLIC binary file");
	}

	Reader header(bytes.data(), bytes.size());
	char magic[sizeof(kMagic)];
	header.raw(magic, sizeof(magic));
	char kind[4];
	header.raw(kind, 4);
	const auto version = header.pod<std::uint32_t>();

	if (version != kFormatVersion) {
		throw FormatError(K::Version, "container: unsupported format version " + std::to_string(version) +
						      " (expected " + std::to_string(kFormatVersion) + ")");
	}

	const auto total = header.pod<std::uint64_t>();

	if (bytes.size() < total) {
		throw FormatError(K::Truncated, "container: truncated file (" + std::to_string(bytes.size()) + " of " +
							std::to_string(total) + " bytes)");
	}

	if (bytes.size() != total) {
		throw FormatError(K::Checksum, "container: length field does not match file size");
	}

	std::uint32_t stored_crc;
	std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);

	if (stored_crc != crc(bytes.data(), bytes.size() - 4)) {
		throw FormatError(K::Checksum, "container: checksum mismatch");
	}

	Document doc;
	doc.kind.assign(kind, 4);

	if (doc.kind != expected_kind) {
		throw FormatError(K::Schema, "container: expected kind " + expected_kind + ", found " + doc.kind);
	}

	Reader r(bytes.data() + kHeaderSize, bytes.size() - kHeaderSize - 4);
	const auto meta_len = r.pod<std::uint64_t>();

	if (meta_len > r.remaining()) {
		throw FormatError(K::Schema, "container: metadata length out of range");
	}

	doc.metadata.resize(meta_len);
	r.raw(doc.metadata.data(), meta_len);
	const auto n_arrays = r.pod<std::uint32_t>();

	for (std::uint32_t i = 0; i < n_arrays; ++i) {
		const auto name_len = r.pod<std::uint32_t>();

		if (name_len > r.remaining()) {
			throw FormatError(K::Schema, "container: array name length out of range");
		}

		std::string name(name_len, '\0');
		r.raw(name.data(), name_len);
		const auto count = r.pod<std::uint64_t>();

		if (count > r.remaining() / sizeof(double)) {
			throw FormatError(K::Schema, "container: array '" + name + "' length out of range");
		}

		std::vector<double> values(count);
		r.raw(values.data(), count * sizeof(double));
		doc.arrays.emplace(std::move(name), std::move(values));
	}

	if (r.remaining() != 0) {
		throw FormatError(K::Schema, "container: trailing bytes before checksum");
	}

	return doc;
}

void writeFileAtomic(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes)
{
	auto tmp = path;
	tmp += ".tmp";

	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);

		if (!out) {
			throw FormatError(FormatError::Kind::Io, "cannot open " + tmp.string() + " for writing");
		}

		out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

		if (!out) {
			throw FormatError(FormatError::Kind::Io, "write failed: " + tmp.string());
		}
	}

	std::filesystem::rename(tmp, path);
}

void writeFileAtomic(const std::filesystem::path &path, const std::string &text)
{
	writeFileAtomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> readFile(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);

	if (!in) {
		throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
	}

	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> interleave(const MultiSequence &streams)
{
	std::vector<double> flat;
	flat.reserve(2 * streams.size() * streamLength(streams));

	for (const auto &s : streams) {
		for (const auto &v : s) {
			flat.push_back(v.real());
			flat.push_back(v.imag());
		}
	}

	return flat;
}

MultiSequence deinterleave(const std::vector<double> &flat, std::size_t n_streams)
{
	if (n_streams == 0 || flat.size() % (2 * n_streams) != 0) {
		throw FormatError(FormatError::Kind::Schema, "container: array size does not match stream count");
	}

	const std::size_t n = flat.size() / (2 * n_streams);
	MultiSequence out(n_streams, ComplexSequence(n));

	for (std::size_t s = 0; s < n_streams; ++s) {
		for (std::size_t i = 0; i < n; ++i) {
			const std::size_t k = 2 * (s * n + i);
			out[s][i] = {flat[k], flat[k + 1]};
		}
	}

	return out;
}

const std::vector<double> &array(const Document &doc, const std::string &name)
{
	const auto it = doc.arrays.find(name);

	if (it == doc.arrays.end()) {
		throw FormatError(FormatError::Kind::Schema, "container: missing array '" + name + "'");
	}

	return it->second;
}

} // namespace clic::container
