#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clic {

using cplx = std::complex<double>;

/// Time-domain baseband samples for one antenna.
using ComplexSequence = std::vector<cplx>;

/// One ComplexSequence per antenna; all streams share a length.
using MultiSequence = std::vector<ComplexSequence>;

class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
	using Error::Error;
};

/// Least-squares basis without full column rank.
class SingularMatrixError : public Error
{
public:
	SingularMatrixError(const std::string &what, double condition_estimate)
		: Error(what), _condition(condition_estimate) {}

	double conditionEstimate() const { return _condition; }

private:
	double _condition;
};

inline void require(bool cond, const std::string &msg)
{
	if (!cond) {
		throw InvalidArgument(msg);
	}
}

inline std::size_t streamLength(const MultiSequence &streams)
{
	return streams.empty() ? 0 : streams.front().size();
}

/// Throws unless every stream has the same length.
void requireAligned(const MultiSequence &streams, const std::string &what);

} // namespace clic
