"""Qubit worked example: A = sigma_z, B = sigma_theta = cos(t) sigma_z + sin(t) sigma_x.

Closed forms for the sequential joint probabilities, their total-variation
distance, invasiveness, maximum disturbance and the norm sums entering the
upper bounds, together with numeric counterparts computed by the library.
"""

from __future__ import annotations

import numpy as np

from . import matkernel as mk
from .correlations import op_joint, tv_distance
from .errors import InvalidBloch
from .measures import invasiveness_state, max_disturbance
from .quantum import DensityMatrix, lueders_instrument, make_observable

I2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)

KET = {
    "z+": np.array([1, 0], dtype=np.complex128),
    "z-": np.array([0, 1], dtype=np.complex128),
    "x+": np.array([1, 1], dtype=np.complex128) / np.sqrt(2),
    "x-": np.array([1, -1], dtype=np.complex128) / np.sqrt(2),
    "y+": np.array([1, 1j], dtype=np.complex128) / np.sqrt(2),
    "y-": np.array([1, -1j], dtype=np.complex128) / np.sqrt(2),
}


def sigma_theta(theta: float) -> np.ndarray:
    return np.cos(theta) * SZ + np.sin(theta) * SX


def bloch_state(x: float, y: float, z: float, tol: float = 1e-12) -> DensityMatrix:
    r2 = x * x + y * y + z * z
    if not np.isfinite(r2) or r2 > 1.0 + tol:
        raise InvalidBloch(f"Bloch vector ({x}, {y}, {z}) has length {np.sqrt(r2):.12g} > 1")
    return DensityMatrix(0.5 * (I2 + x * SX + y * SY + z * SZ))


# -- closed forms ----------------------------------------------------------

def joint_ab_closed(theta, x, z):
    """P(a -> b) as a 2x2 array indexed [a, b] with a, b in (-1, +1)."""
    c = np.cos(theta)
    out = np.empty((2, 2))
    for i, s in enumerate((-1.0, 1.0)):  # a = s
        out[i, 1] = (1 + s * c) / 4 * (1 + s * z)
        out[i, 0] = (1 - s * c) / 4 * (1 + s * z)
    return out


def joint_ba_closed(theta, x, z):
    """P(b -> a) as a 2x2 array indexed [b, a]."""
    c, s_ = np.cos(theta), np.sin(theta)
    st = c * z + s_ * x
    out = np.empty((2, 2))
    for j, s in enumerate((-1.0, 1.0)):  # a = s
        out[1, j] = (1 + s * c) / 4 * (1 + st)
        out[0, j] = (1 - s * c) / 4 * (1 - st)
    return out


def tv_closed(theta, x, z):
    c, s = np.cos(theta), np.sin(theta)
    return ((1 + c) / 2 * abs((1 - c) * z - s * x)
            + (1 - c) / 2 * abs((1 + c) * z + s * x))


def tv_closed_max(theta, x, z):
    return max(delta_a_b_closed(theta, x, z), delta_b_a_closed(theta, x, z))


def inv_a_closed(theta, x, y, z):
    return np.hypot(x, y)


def inv_b_closed(theta, x, y, z):
    return np.hypot(-np.sin(theta) * z + np.cos(theta) * x, y)


def delta_a_b_closed(theta, x, z):
    return abs(np.sin(theta) * x)


def delta_b_a_closed(theta, x, z):
    s = np.sin(theta)
    return abs(s * (-s * z + np.cos(theta) * x))


def anticomm_sum_closed(theta):
    c, s = np.cos(theta), np.sin(theta)
    return 1 + 0.5 * np.sqrt((1 + c) ** 2 + s**2) + 0.5 * np.sqrt((1 - c) ** 2 + s**2)


def comm_sum_stated(theta):
    """Value sqrt(2)|sin theta| as usually quoted for the sandwiched-commutator sum."""
    return np.sqrt(2) * abs(np.sin(theta))


def comm_sum_direct_closed(theta):
    """Each cell is |sin theta|/4 * ||sigma_x +- i sigma_y|| = |sin theta|/2."""
    return 2 * abs(np.sin(theta))


def upper_bound_closed(theta, x, y, z, comm_sum=comm_sum_direct_closed):
    k = min(comm_sum(theta), anticomm_sum_closed(theta))
    return k * (inv_a_closed(theta, x, y, z) + inv_b_closed(theta, x, y, z))


def comm_expectation_closed(theta, y):
    """<[sigma_z, sigma_theta]>_rho = 2i sin(theta) <sigma_y>."""
    return 2j * np.sin(theta) * y


def comm_state_norm_closed(theta):
    """tr[-[A, B]^2 rho] = 4 sin^2(theta), for every state."""
    return 4 * np.sin(theta) ** 2


# -- numeric counterparts --------------------------------------------------

class QubitExample:
    """A = sigma_z, B = sigma_theta, Lueders measurements of both."""

    def __init__(self, theta: float):
        self.theta = float(theta)
        self.A = make_observable(SZ)
        self.B = make_observable(sigma_theta(theta))
        self.MA = lueders_instrument(self.A)
        self.MB = lueders_instrument(self.B)

    def quantities(self, x, y, z) -> dict:
        rho = bloch_state(x, y, z)
        jab = op_joint(rho, self.A, self.B)
        jba = op_joint(rho, self.B, self.A)
        comm = mk.commutator(self.A.mat, self.B.mat)
        return {
            "P_ab": jab.probs,
            "P_ba": jba.probs,
            "tv": tv_distance(jab, jba.transpose()),
            "inv_a": invasiveness_state(self.MA, rho),
            "inv_b": invasiveness_state(self.MB, rho),
            "delta_a_b": max_disturbance(self.MA, self.B, rho),
            "delta_b_a": max_disturbance(self.MB, self.A, rho),
            "anticomm_sum": self.anticomm_sum(),
            "comm_sum": self.comm_sum(),
            "comm_expect": complex(np.trace(rho.mat @ comm)),
            "comm_state_norm": float(np.real(np.trace(-(comm @ comm) @ rho.mat))),
        }

    def anticomm_sum(self) -> float:
        return float(sum(mk.op_norm(0.5 * mk.anticommutator(pa, pb))
                         for pa in self.A.projectors for pb in self.B.projectors))

    def comm_sum(self) -> float:
        return float(sum(mk.op_norm(pa @ mk.commutator(pa, pb))
                         for pa in self.A.projectors for pb in self.B.projectors))

    def comm_sum_b(self) -> float:
        return float(sum(mk.op_norm(pb @ mk.commutator(pb, pa))
                         for pa in self.A.projectors for pb in self.B.projectors))

    def closed_forms(self, x, y, z) -> dict:
        t = self.theta
        return {
            "P_ab": joint_ab_closed(t, x, z),
            "P_ba": joint_ba_closed(t, x, z),
            "tv": tv_closed(t, x, z),
            "inv_a": inv_a_closed(t, x, y, z),
            "inv_b": inv_b_closed(t, x, y, z),
            "delta_a_b": delta_a_b_closed(t, x, z),
            "delta_b_a": delta_b_a_closed(t, x, z),
            "anticomm_sum": anticomm_sum_closed(t),
            "comm_sum": comm_sum_stated(t),
            "comm_expect": comm_expectation_closed(t, y),
            "comm_state_norm": comm_state_norm_closed(t),
        }


def bloch_disk(n_radii: int = 5, n_angles: int = 10) -> list[tuple[float, float]]:
    """(x, z) points with x^2 + z^2 <= 1: radii k/(n_radii-1), evenly spaced angles."""
    pts = []
    for k in range(n_radii):
        r = k / (n_radii - 1) if n_radii > 1 else 0.0
        for j in range(n_angles):
            phi = 2 * np.pi * j / n_angles
            pts.append((r * np.sin(phi), r * np.cos(phi)))
    return pts


def surface(theta: float, n: int = 41) -> list[dict]:
    """TV distance and both bounds on an n x n (x, z) grid inside the disk, y = 0."""
    ex = QubitExample(theta)
    rows = []
    for x in np.linspace(-1, 1, n):
        for z in np.linspace(-1, 1, n):
            if x * x + z * z > 1.0:
                continue
            q = ex.quantities(x, 0.0, z)
            k = min(ex.anticomm_sum(), ex.comm_sum())
            rows.append({"x": x, "z": z, "tv": q["tv"],
                         "lower": max(q["delta_a_b"], q["delta_b_a"]),
                         "upper": k * (q["inv_a"] + q["inv_b"])})
    return rows
