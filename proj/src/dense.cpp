#include "hfdaep/dense.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hfdaep {

std::vector<double> dense_solve(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = b.size();
    if (n == 0) throw std::invalid_argument("dense_solve: empty system");
    if (a.size() != n * n)
        throw std::invalid_argument("dense_solve: matrix size " + std::to_string(a.size()) +
                                    " does not match vector size " + std::to_string(n));

    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = a[i * n + j];
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(n));

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const double rcond = lu.rcond();
    if (!std::isfinite(rcond) || rcond < 1e-13)
        throw std::runtime_error("dense_solve: matrix singular or ill-conditioned, rcond=" +
                                 std::to_string(rcond));

    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite())
        throw std::runtime_error("dense_solve: non-finite solution, rcond=" + std::to_string(rcond));
    return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace hfdaep
