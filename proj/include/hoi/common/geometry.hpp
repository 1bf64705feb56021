#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace hoi {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) { return deg * Scalar(kPi) / Scalar(180); }
template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) { return rad * Scalar(180) / Scalar(kPi); }

/// Largest absolute entry of axes^T axes - I.
template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& axes)
{
    using Scalar = typename Derived::Scalar;
    const Mat3<Scalar> gram = axes.transpose() * axes;
    return (gram - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff();
}

/// True when the columns form a right-handed orthonormal basis within tol.
template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& axes, typename Derived::Scalar tol)
{
    using std::abs;
    return orthonormality_error(axes) <= tol && abs(axes.determinant() - 1) <= tol;
}

/// Dot product clamped into [-1, 1] then passed through arccos.
template <typename A, typename B>
typename A::Scalar safe_angle(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v)
{
    using Scalar = typename A::Scalar;
    const Scalar c = std::clamp(u.dot(v), Scalar(-1), Scalar(1));
    return std::acos(c);
}

/// Rotation angle of a rotation matrix, in [0, pi].
template <typename Derived>
typename Derived::Scalar rotation_angle(const Eigen::MatrixBase<Derived>& rot)
{
    using Scalar = typename Derived::Scalar;
    // atan2 form keeps precision near 0 and pi.
    const Eigen::AngleAxis<Scalar> aa{Mat3<Scalar>(rot)};
    return std::abs(aa.angle());
}

/// Axis-angle (rotation vector) of a quaternion; zero vector for identity.
template <typename Scalar>
Vec3<Scalar> to_rotation_vector(const Eigen::Quaternion<Scalar>& q)
{
    const Eigen::AngleAxis<Scalar> aa{q.normalized()};
    Scalar angle = aa.angle();
    Vec3<Scalar> axis = aa.axis();
    if (angle > Scalar(kPi)) {
        angle = Scalar(2 * kPi) - angle;
        axis = -axis;
    }
    return axis * angle;
}

template <typename Derived>
Eigen::Quaternion<typename Derived::Scalar> from_rotation_vector(const Eigen::MatrixBase<Derived>& rv)
{
    using Scalar = typename Derived::Scalar;
    const Scalar angle = rv.norm();
    if (angle == Scalar(0))
        return Eigen::Quaternion<Scalar>::Identity();
    return Eigen::Quaternion<Scalar>{Eigen::AngleAxis<Scalar>(angle, rv / angle)};
}

/// Rotation of `angle` radians about a coordinate axis.
template <typename Scalar>
Mat3<Scalar> axis_rotation(int axis, Scalar angle)
{
    return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::Unit(axis)).toRotationMatrix();
}

} // namespace hoi
