#include "dcm/quadrature.hpp"

#include "dcm/errors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace dcm {

std::vector<QuadNode> gauss_legendre(int count) {
    if (count < 1) throw InvalidInput("gauss_legendre: count must be positive");
    // Golub-Welsch on the Jacobi matrix of Legendre polynomials over [-1, 1].
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(count, count);
    for (int k = 1; k < count; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k, k - 1) = beta;
        jac(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    std::vector<QuadNode> nodes(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double v0 = eig.eigenvectors()(0, k);
        nodes[static_cast<std::size_t>(k)] = {0.5 * (eig.eigenvalues()(k) + 1.0), v0 * v0};
    }
    std::sort(nodes.begin(), nodes.end(), [](const QuadNode& a, const QuadNode& b) { return a.x < b.x; });
    return nodes;
}

std::vector<TriangleNode> triangle_rule(int degree) {
    if (degree < 0) throw InvalidInput("triangle_rule: negative degree");
    // Duffy map (u, v) -> (u, v (1 - u)) carries the extra factor (1 - u), one more degree in u.
    const int count_v = std::max(1, (degree + 2) / 2);
    const int count_u = std::max(1, (degree + 3) / 2);
    const auto gu = gauss_legendre(count_u);
    const auto gv = gauss_legendre(count_v);
    std::vector<TriangleNode> rule;
    rule.reserve(gu.size() * gv.size());
    for (const auto& nu : gu) {
        for (const auto& nv : gv) {
            const double x = nu.x;
            const double y = nv.x * (1.0 - nu.x);
            // area of reference triangle is 1/2; jacobian (1 - u)
            rule.push_back({{1.0 - x - y, x, y}, 2.0 * nu.weight * nv.weight * (1.0 - nu.x)});
        }
    }
    return rule;
}

}  // namespace dcm
