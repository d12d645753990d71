"""Array geometry: the 2x2 Tx/Rx aperture, its baselines and projected angles.

Coordinates are array-centred: the elements lie in the z = 0 plane and
boresight is +z.  Baseline orientation ``Phi`` is measured clockwise from
+x (toward -y), so the velocity component seen by a baseline is
``|v_xy| * cos(phi_v + Phi)`` with ``phi_v`` measured counter-clockwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

SPEED_OF_LIGHT = 299_792_458.0
"Speed of light in vacuum, m/s."


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgument(f"Vec3.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype or float)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(k * self.x, k * self.y, k * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def rotated_z(self, angle_rad: float) -> "Vec3":
        """Rotate counter-clockwise about +z."""
        c, s = math.cos(angle_rad), math.sin(angle_rad)
        return Vec3(c * self.x - s * self.y, s * self.x + c * self.y, self.z)

    @classmethod
    def of(cls, values) -> "Vec3":
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)


def wavelength(f0: float) -> float:
    return SPEED_OF_LIGHT / f0


@dataclass(frozen=True)
class ArrayGeometry:
    """One transmitter and three receivers in the z = 0 plane.

    ``rx_positions`` is ordered (Rx1, Rx2, Rx3); public channel indices are
    1-based to match that naming.
    """

    f0: float
    tx_position: Vec3
    rx_positions: tuple[Vec3, Vec3, Vec3]
    side_length: float
    mount_rotation_deg: float = 0.0
    center: Vec3 = field(default=Vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not self.f0 > 0:
            raise InvalidArgument(f"f0 must be positive, got {self.f0!r}")
        if len(self.rx_positions) != 3:
            raise InvalidArgument("exactly three receive elements are required")
        for p in (self.tx_position, *self.rx_positions):
            if p.z != 0.0:
                raise InvalidArgument("array elements must lie in the z = 0 plane")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    def rx(self, index: int) -> Vec3:
        _check_rx_index(index)
        return self.rx_positions[index - 1]

    def rotated(self, angle_deg: float) -> "ArrayGeometry":
        """Copy of the array rotated counter-clockwise about +z."""
        a = math.radians(angle_deg)
        return ArrayGeometry(
            f0=self.f0,
            tx_position=self.tx_position.rotated_z(a),
            rx_positions=tuple(p.rotated_z(a) for p in self.rx_positions),
            side_length=self.side_length,
            mount_rotation_deg=self.mount_rotation_deg,
        )


def make_square_array(
    side_length_wavelengths: float,
    f0: float,
    mount_rotation_deg: float = 0.0,
) -> ArrayGeometry:
    """Square 2x2 layout with side ``side_length_wavelengths * lambda``.

    Corner assignment (x, y) in units of L/2::

        Tx  (-1, +1)    Rx3 (+1, +1)
        Rx2 (-1, -1)    Rx1 (+1, -1)

    Rx1-Rx2 is the Phi = 0 baseline, Rx1-Rx3 the Phi = 90 baseline and the
    diagonal Rx2-Rx3 the Phi = -45 baseline with D = sqrt(2) L.  Tx and Rx3
    share the top edge; ``mount_rotation_deg`` rotates that pair about the
    midpoint of the edge to emulate a skewed antenna mount.
    """
    if not side_length_wavelengths > 0:
        raise InvalidArgument(
            f"side length must be positive, got {side_length_wavelengths!r}"
        )
    if not f0 > 0:
        raise InvalidArgument(f"f0 must be positive, got {f0!r}")
    if side_length_wavelengths < 5:
        warnings.warn(
            f"side length {side_length_wavelengths} wavelengths is below the usual "
            "5-wavelength minimum; the correlator phase may not complete a cycle",
            stacklevel=2,
        )
    lam = SPEED_OF_LIGHT / f0
    half = 0.5 * side_length_wavelengths * lam
    tx = Vec3(-half, half, 0.0)
    rx3 = Vec3(half, half, 0.0)
    if mount_rotation_deg:
        pivot = Vec3(0.0, half, 0.0)
        a = math.radians(mount_rotation_deg)
        tx = pivot + (tx - pivot).rotated_z(a)
        rx3 = pivot + (rx3 - pivot).rotated_z(a)
    return ArrayGeometry(
        f0=f0,
        tx_position=tx,
        rx_positions=(Vec3(half, -half, 0.0), Vec3(-half, -half, 0.0), rx3),
        side_length=2 * half,
        mount_rotation_deg=mount_rotation_deg,
    )


@dataclass(frozen=True)
class Baseline:
    rx_a: int
    rx_b: int
    B_hat: Vec3
    Phi: float
    D: float
    D_lambda: float

    def axis(self) -> Vec3:
        """Unit vector (cos Phi, -sin Phi, 0) of the baseline's named axis."""
        p = math.radians(self.Phi)
        return Vec3(math.cos(p), -math.sin(p), 0.0)


def _check_rx_index(index) -> None:
    if index not in (1, 2, 3):
        raise InvalidArgument(f"receiver index must be 1, 2 or 3, got {index!r}")


def baseline(geom: ArrayGeometry, a: int, b: int) -> Baseline:
    """Baseline from receiver ``a`` to receiver ``b`` (B_hat points a -> b)."""
    _check_rx_index(a)
    _check_rx_index(b)
    if a == b:
        raise InvalidArgument("baseline needs two distinct receivers")
    d = geom.rx(b) - geom.rx(a)
    D = d.norm()
    B_hat = d.scale(1.0 / D)
    psi = math.degrees(math.atan2(B_hat.y, B_hat.x))
    phi = -psi
    phi -= 180.0 * round(phi / 180.0)
    if phi == -90.0:
        phi = 90.0
    return Baseline(
        rx_a=a, rx_b=b, B_hat=B_hat, Phi=phi, D=D, D_lambda=D * geom.f0 / SPEED_OF_LIGHT
    )


def named_baselines(geom: ArrayGeometry) -> dict[int, Baseline]:
    """The three baselines keyed by nominal Phi (0, 90, -45), oriented along +x, +y
    and (+x, +y)/sqrt(2) respectively for the nominal layout."""
    return {0: baseline(geom, 2, 1), 90: baseline(geom, 1, 3), -45: baseline(geom, 2, 3)}


def projected_angle(target: Vec3, bl: Baseline) -> float:
    """Angle off +z of ``target`` projected onto span{B_hat, z}, in radians.

    Positive when the target lies toward B_hat.
    """
    if target.norm() == 0.0:
        raise InvalidArgument("target at the array origin has no direction")
    along = target.dot(bl.B_hat)
    return math.atan2(along, target.z)
