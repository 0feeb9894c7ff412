#include "mvabo/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace mvabo {

KernelSpec KernelSpec::isotropic(double lengthscale, double signal_variance) {
  KernelSpec spec;
  spec.family = KernelFamily::kIsotropicGaussian;
  spec.signal_variance = signal_variance;
  spec.lengthscales = Eigen::VectorXd::Constant(1, lengthscale);
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::ard(const Eigen::VectorXd& lengthscales,
                           double signal_variance) {
  KernelSpec spec;
  spec.family = KernelFamily::kArdGaussian;
  spec.signal_variance = signal_variance;
  spec.lengthscales = lengthscales;
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (!(signal_variance > 0.0))
    throw std::invalid_argument("KernelSpec: signal variance must be > 0");
  if (lengthscales.size() == 0)
    throw std::invalid_argument("KernelSpec: no lengthscales");
  if (family == KernelFamily::kIsotropicGaussian && lengthscales.size() != 1)
    throw std::invalid_argument(
        "KernelSpec: isotropic kernel takes a single lengthscale");
  for (int i = 0; i < lengthscales.size(); ++i)
    if (!(lengthscales(i) > 0.0))
      throw std::invalid_argument("KernelSpec: lengthscales must be > 0");
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& z1,
                   const Eigen::VectorXd& z2) {
  if (z1.size() != z2.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  if (spec.family == KernelFamily::kArdGaussian &&
      spec.lengthscales.size() != z1.size())
    throw std::invalid_argument(
        "kernel_eval: ARD lengthscale count does not match input dimension");
  double q = 0.0;
  for (int i = 0; i < z1.size(); ++i) {
    const double d = z1(i) - z2(i);
    const double l = spec.lengthscale(i);
    q += d * d / (2.0 * l * l);
  }
  return spec.signal_variance * std::exp(-q);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("kernel_matrix: dimension mismatch");
  if (spec.family == KernelFamily::kArdGaussian &&
      spec.lengthscales.size() != a.cols())
    throw std::invalid_argument(
        "kernel_matrix: ARD lengthscale count does not match input dimension");
  // Scale the inputs once, then use the expanded squared-distance identity.
  Eigen::MatrixXd as(a.rows(), a.cols());
  Eigen::MatrixXd bs(b.rows(), b.cols());
  for (int j = 0; j < a.cols(); ++j) {
    const double inv =
        1.0 / (spec.lengthscale(j) * std::sqrt(2.0));
    as.col(j) = a.col(j) * inv;
    bs.col(j) = b.col(j) * inv;
  }
  const Eigen::VectorXd an = as.rowwise().squaredNorm();
  const Eigen::VectorXd bn = bs.rowwise().squaredNorm();
  Eigen::MatrixXd q = ((-2.0 * as * bs.transpose()).colwise() + an).rowwise() +
                      bn.transpose();
  return spec.signal_variance * (-q.cwiseMax(0.0)).array().exp().matrix();
}

}  // namespace mvabo
