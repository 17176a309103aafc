#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace swr {

using cplx = std::complex<double>;

template <class S> using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S> using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatR = Mat<double>;
using VecR = Vec<double>;
using MatC = Mat<cplx>;
using VecC = Vec<cplx>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(what);
}

template <class S> struct is_complex : std::false_type {};
template <class T> struct is_complex<std::complex<T>> : std::true_type {};
template <class S> inline constexpr bool is_complex_v = is_complex<S>::value;

inline double abs2(double x) { return x * x; }
inline double abs2(cplx z) { return std::norm(z); }

inline constexpr double pi = 3.14159265358979323846;

}  // namespace swr
