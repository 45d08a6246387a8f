#ifndef RANDSEC_TYPES_HPP_
#define RANDSEC_TYPES_HPP_

#include <complex>

#include <Eigen/Dense>

namespace randsec {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

}  // namespace randsec

#endif  // RANDSEC_TYPES_HPP_
