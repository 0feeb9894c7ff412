#pragma once

#include <Eigen/Core>

namespace mvabo {

enum class KernelFamily { kIsotropicGaussian, kArdGaussian };

/// Gaussian (squared-exponential) kernel over the joint input space.
/// Isotropic variants carry a single lengthscale; ARD variants carry one
/// lengthscale per input dimension.
struct KernelSpec {
  KernelFamily family = KernelFamily::kIsotropicGaussian;
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Constant(1, 1.0);

  static KernelSpec isotropic(double lengthscale, double signal_variance = 1.0);
  static KernelSpec ard(const Eigen::VectorXd& lengthscales,
                        double signal_variance = 1.0);

  /// Throws std::invalid_argument when a lengthscale or the signal variance
  /// is not strictly positive.
  void validate() const;

  /// Lengthscale applied to dimension i (broadcasts the isotropic value).
  double lengthscale(int i) const {
    return family == KernelFamily::kIsotropicGaussian ? lengthscales(0)
                                                      : lengthscales(i);
  }
};

/// k(z1, z2) = signal_variance * exp(-sum_i (z1_i - z2_i)^2 / (2 l_i^2)).
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& z1,
                   const Eigen::VectorXd& z2);

/// Dense kernel matrix of the rows of A against the rows of B.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

}  // namespace mvabo
