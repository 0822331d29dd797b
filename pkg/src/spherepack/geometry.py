"""Conformal geometry on the unit 3-sphere and stereographic transfer to R^3.

Points of S^3 are plain ``numpy`` arrays of shape ``(4,)`` in ambient R^4
coordinates. Balls and spheres on S^3 carry an angular radius in radians.
Every map renormalizes its output to unit length.

Angles along a great circle through a reference point ``b`` are handled in
the signed form ``phi`` (0 at ``b``, pi at ``-b``) so that images of tiny
balls near ``b`` keep full relative precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, PoleInBallError

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0
UNIT_TOL = 1e-9


def as_point4(p) -> np.ndarray:
    """Return ``p`` as a float array of shape (4,), checking it lies on S^3."""
    a = np.asarray(p, dtype=float)
    if a.shape != (4,):
        raise InvalidInputError(f"expected a 4-vector, got shape {a.shape}")
    norm = float(np.linalg.norm(a))
    if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_TOL:
        raise InvalidInputError(f"point is not on the unit 3-sphere (norm {norm!r})")
    return a


def _check_angle(radius: float, what: str) -> float:
    radius = float(radius)
    if not (0.0 < radius < np.pi):
        raise InvalidInputError(f"{what} radius must lie in (0, pi), got {radius!r}")
    return radius


@dataclass(frozen=True)
class SphericalBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point4(self.center).copy()
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", _check_angle(self.radius, "ball"))


@dataclass(frozen=True)
class SphericalSphere:
    """Codimension-one sphere on S^3: the boundary of a spherical ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point4(self.center).copy()
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", _check_angle(self.radius, "sphere"))

    @property
    def contraction(self) -> float:
        """tan^2(radius/2), the ratio by which inversion rescales tan(angle/2)."""
        return float(np.tan(self.radius / 2.0) ** 2)


@dataclass(frozen=True)
class EuclideanBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).copy()
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise InvalidInputError(f"expected a finite 3-vector center, got {self.center!r}")
        c.flags.writeable = False
        r = float(self.radius)
        if not (r > 0.0 and np.isfinite(r)):
            raise InvalidInputError(f"ball radius must be positive, got {r!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)


@dataclass(frozen=True)
class ConformalMapS3:
    """``power``-fold iterate of inversion in ``inversion_sphere``.

    With ``pre_antipode`` each step first negates the point, so a single
    step is ``p -> I_S(-p)``, which contracts S^3 toward ``S.center``.
    ``power == 0`` is the identity.
    """

    inversion_sphere: SphericalSphere
    pre_antipode: bool = False
    power: int = 1

    def __post_init__(self):
        if int(self.power) != self.power or self.power < 0:
            raise InvalidInputError(f"power must be a non-negative integer, got {self.power!r}")

    def with_power(self, power: int) -> "ConformalMapS3":
        return ConformalMapS3(self.inversion_sphere, self.pre_antipode, power)


# ---------------------------------------------------------------- distances


def angular_distance(p, q) -> float:
    """Great-circle distance between two points of S^3, in radians.

    Uses the chord length, which keeps relative accuracy for nearly
    coincident points where ``arccos(p . q)`` would not.
    """
    p = as_point4(p)
    q = as_point4(q)
    return float(angular_distances(p[None, :], q[None, :])[0])


def angular_distances(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise (broadcasting) chord-based angular distance, no validation."""
    chord = np.sqrt(np.sum((P - Q) ** 2, axis=-1))
    return 2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))


# ---------------------------------------------------------------- great-circle frames


def _fallback_direction(axis: np.ndarray) -> np.ndarray:
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        if abs(float(e @ axis)) < 1.0 - 1e-12:
            u = e - (e @ axis) * axis
            return u / np.linalg.norm(u)
    raise AssertionError("unreachable: some axis is not parallel to a unit vector")


def _polar(axis: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Angle from ``axis`` and unit direction in ``axis``-perp for each row of ``points``.

    Rows located exactly at ``axis`` or ``-axis`` get a fixed fallback
    direction through the first coordinate axis not parallel to ``axis``.
    """
    dots = points @ axis
    orth = points - dots[:, None] * axis[None, :]
    norms = np.linalg.norm(orth, axis=1)
    theta = np.arctan2(norms, dots)
    dirs = np.empty_like(orth)
    ok = norms > 0.0
    dirs[ok] = orth[ok] / norms[ok, None]
    if not np.all(ok):
        dirs[~ok] = _fallback_direction(axis)
    return theta, dirs


def _on_circle(axis: np.ndarray, angle: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    pts = np.cos(angle)[:, None] * axis[None, :] + np.sin(angle)[:, None] * dirs
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def _invert_angle(phi, t2):
    # tan(phi'/2) = t2 / tan(phi/2); continuous and decreasing on (-pi, 2*pi).
    return 2.0 * np.arctan2(t2 * np.cos(phi / 2.0), np.sin(phi / 2.0))


def _sigma_angle(phi, t2):
    # antipode then inversion: tan(phi'/2) = t2 * tan(phi/2), direction reversed.
    return 2.0 * np.arctan2(t2 * np.sin(phi / 2.0), np.cos(phi / 2.0))


# ---------------------------------------------------------------- points


def invert_point_in_sphere(S: SphericalSphere, p) -> np.ndarray:
    """Inversion of S^3 in the sphere ``S``.

    Fixes ``S`` pointwise and swaps ``S.center`` with its antipode.
    """
    p = as_point4(p)
    theta, dirs = _polar(S.center, p[None, :])
    return _on_circle(S.center, _invert_angle(theta, S.contraction), dirs)[0]


def apply_conformal_to_point(m: ConformalMapS3, p) -> np.ndarray:
    p = as_point4(p)
    return apply_conformal_to_points(m, p[None, :])[0]


def apply_conformal_to_points(m: ConformalMapS3, points: np.ndarray) -> np.ndarray:
    pts = np.array(points, dtype=float)
    axis = m.inversion_sphere.center
    t2 = m.inversion_sphere.contraction
    for _ in range(m.power):
        theta, dirs = _polar(axis, pts)
        if m.pre_antipode:
            pts = _on_circle(axis, _sigma_angle(theta, t2), -dirs)
        else:
            pts = _on_circle(axis, _invert_angle(theta, t2), dirs)
    return pts


# ---------------------------------------------------------------- balls


def apply_conformal_to_balls(
    m: ConformalMapS3, centers: np.ndarray, radii: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized image of spherical balls under ``m``.

    The image of a ball is found from the images of its two extreme points
    on the great circle through ``S.center`` and the ball center.
    """
    centers = np.array(centers, dtype=float)
    radii = np.array(radii, dtype=float)
    if m.power == 0:
        return centers, radii
    axis = m.inversion_sphere.center
    t2 = m.inversion_sphere.contraction
    for _ in range(m.power):
        phi, dirs = _polar(axis, centers)
        if m.pre_antipode:
            lo = _sigma_angle(phi - radii, t2)
            hi = _sigma_angle(phi + radii, t2)
            dirs = -dirs
        else:
            lo = _invert_angle(phi + radii, t2)
            hi = _invert_angle(phi - radii, t2)
        mid = 0.5 * (lo + hi)
        radii = 0.5 * (hi - lo)
        centers = _on_circle(axis, mid, dirs)
    return centers, radii


def apply_conformal_to_ball(m: ConformalMapS3, ball: SphericalBall) -> SphericalBall:
    if m.power == 0:
        return ball
    c, r = apply_conformal_to_balls(m, ball.center[None, :], np.array([ball.radius]))
    return SphericalBall(c[0], float(r[0]))


# ---------------------------------------------------------------- stereographic projection


def pole_basis(pole) -> np.ndarray:
    """Orthonormal basis (rows) of the hyperplane orthogonal to ``pole``.

    Gram-Schmidt on the standard axes, skipping the one most parallel to
    ``pole``, in index order.
    """
    pole = as_point4(pole)
    skip = int(np.argmax(np.abs(pole)))
    basis: list[np.ndarray] = [pole / np.linalg.norm(pole)]
    for i in range(4):
        if i == skip:
            continue
        v = np.zeros(4)
        v[i] = 1.0
        for w in basis:
            v = v - (v @ w) * w
        basis.append(v / np.linalg.norm(v))
    return np.array(basis[1:])


def project_points(pole, points: np.ndarray) -> np.ndarray:
    pole = as_point4(pole)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dots = pts @ pole
    if np.any(dots >= 1.0):
        raise PoleInBallError("cannot project the pole itself")
    # -pole is the origin; the distance from it is tan(beta/2) with beta measured from -pole
    beta, dirs = _polar(-pole, pts)
    scale = np.tan(beta / 2.0)
    return (scale[:, None] * dirs) @ pole_basis(pole).T


def project_balls(pole, centers: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stereographic images (Euclidean centers, radii) of spherical balls."""
    pole = as_point4(pole)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    beta, dirs = _polar(-pole, centers)
    # angular distance from the pole is pi - beta
    bad = np.pi - beta <= radii + 1e-12
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise PoleInBallError(f"pole lies inside or on ball {i}")
    # signed image distances tan((beta -+ r)/2), combined without cancellation
    denom = 2.0 * np.cos((beta + radii) / 2.0) * np.cos((beta - radii) / 2.0)
    dist = np.sin(beta) / denom
    out_r = np.sin(radii) / denom
    out_c = (dist[:, None] * dirs) @ pole_basis(pole).T
    return out_c, out_r


def stereographic_project(pole, x):
    """Project a point or a :class:`SphericalBall` from ``pole`` into R^3."""
    if isinstance(x, SphericalBall):
        c, r = project_balls(pole, x.center[None, :], np.array([x.radius]))
        return EuclideanBall(c[0], float(r[0]))
    return project_points(pole, as_point4(x)[None, :])[0]


def inverse_stereographic(pole, y) -> np.ndarray:
    """Inverse of :func:`stereographic_project` for points."""
    pole = as_point4(pole)
    y = np.asarray(y, dtype=float)
    v = y @ pole_basis(pole)
    s2 = float(v @ v)
    p = (2.0 * v + (s2 - 1.0) * pole) / (s2 + 1.0)
    return p / np.linalg.norm(p)
