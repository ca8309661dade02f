"""Spring-mass kinematics on the undulating field.

Cells are spheres integrated with semi-implicit Euler: Hooke springs with
axial damping on every bond, pairwise overlap repulsion, gravity, projection
onto the terrain heightmap, and reflective walls at the field boundary.
Connection geometry follows three rules: bonding reaches 1.95x the smaller
radius, a natural length never exceeds 1.10x the smaller radius, and a bond
snaps once stretched past 2.00x its natural length.

Contact and connection-candidate queries run on a sorted spatial hash whose
results are required (and tested) to match brute-force pair enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIELD_SIZE = 32
CONNECT_FACTOR = 1.95
STRETCH_CAP_FACTOR = 1.10
BREAK_FACTOR = 2.00
MIN_LENGTH_FACTOR = 0.1


class NumericBlowupError(RuntimeError):
    pass


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class MechanicsParams:
    dt: float = 0.05
    k_spring: float = 10.0
    damping: float = 1.5
    gravity: float = 9.8
    k_repulsion: float = 10.0
    theta_l: float = 0.5     # |L_out| threshold for muscle action
    delta_l: float = 0.02    # natural-length change per unit time


class FieldHeightmap:
    """32x32 grid of block heights with a bilinear query over [0, 32)^2."""

    def __init__(self, grid: np.ndarray):
        grid = np.asarray(grid, dtype=np.float64)
        if grid.shape != (FIELD_SIZE, FIELD_SIZE):
            raise ValueError(f"heightmap must be {FIELD_SIZE}x{FIELD_SIZE}, got {grid.shape}")
        if not np.isfinite(grid).all():
            raise ValueError("heightmap contains non-finite heights")
        self.grid = grid

    @classmethod
    def flat(cls, height: float = 0.0) -> "FieldHeightmap":
        return cls(np.full((FIELD_SIZE, FIELD_SIZE), height))

    @classmethod
    def rolling(cls, stream, amplitude: float = 1.0, waves: int = 3) -> "FieldHeightmap":
        """Smooth undulations from a few random cosine waves."""
        x, y = np.meshgrid(np.arange(FIELD_SIZE, dtype=np.float64),
                           np.arange(FIELD_SIZE, dtype=np.float64), indexing="ij")
        grid = np.zeros((FIELD_SIZE, FIELD_SIZE))
        for _ in range(waves):
            u = stream.uniform(4)
            kx = 2.0 * np.pi * (1.0 + 2.0 * u[0]) / FIELD_SIZE
            ky = 2.0 * np.pi * (1.0 + 2.0 * u[1]) / FIELD_SIZE
            grid += np.cos(kx * x + 2.0 * np.pi * u[2]) * np.cos(ky * y + 2.0 * np.pi * u[3])
        peak = np.abs(grid).max()
        if peak > 0:
            grid *= amplitude / peak
        return cls(grid)

    def height(self, x, y) -> np.ndarray:
        """Bilinear height at (x, y); edge rows extend past index 31."""
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, FIELD_SIZE - 1e-9)
        y = np.clip(np.asarray(y, dtype=np.float64), 0.0, FIELD_SIZE - 1e-9)
        i0 = np.minimum(x.astype(np.int64), FIELD_SIZE - 2)
        j0 = np.minimum(y.astype(np.int64), FIELD_SIZE - 2)
        fx = x - i0
        fy = y - j0
        g = self.grid
        return ((1 - fx) * (1 - fy) * g[i0, j0] + fx * (1 - fy) * g[i0 + 1, j0]
                + (1 - fx) * fy * g[i0, j0 + 1] + fx * fy * g[i0 + 1, j0 + 1])

    def save(self, path) -> None:
        np.savetxt(path, self.grid, fmt="%.9g")

    @classmethod
    def load(cls, path) -> "FieldHeightmap":
        return cls(np.loadtxt(path))


def connect_range(r_a: float, r_b: float) -> float:
    return CONNECT_FACTOR * min(r_a, r_b)


def initial_natural_length(distance: float, r_a: float, r_b: float) -> float:
    r = min(r_a, r_b)
    return float(np.clip(distance, MIN_LENGTH_FACTOR * r, STRETCH_CAP_FACTOR * r))


def can_connect(distance: float, r_a: float, r_b: float) -> bool:
    """Bonding is allowed up to and including 1.95x the smaller radius."""
    return distance <= connect_range(r_a, r_b)


def check_break(distance: float, natural_length: float) -> bool:
    """A bond breaks strictly beyond 2.00x its natural length."""
    return distance > BREAK_FACTOR * natural_length


def adjust_natural_length(natural_length: float, l_out: float, r_a: float,
                          r_b: float, params: MechanicsParams) -> float:
    """Muscle drive: grow/shrink the rest length when |L_out| crosses theta."""
    if l_out > params.theta_l:
        natural_length += params.delta_l * params.dt
    elif l_out < -params.theta_l:
        natural_length -= params.delta_l * params.dt
    r = min(r_a, r_b)
    return float(np.clip(natural_length, MIN_LENGTH_FACTOR * r, STRETCH_CAP_FACTOR * r))


def contact_pairs_bruteforce(pos: np.ndarray, radius: np.ndarray) -> np.ndarray:
    """All index pairs (i < j) with center distance < r_i + r_j."""
    n = pos.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    ii, jj = np.triu_indices(n, k=1)
    d = np.linalg.norm(pos[ii] - pos[jj], axis=1)
    mask = d < radius[ii] + radius[jj]
    return np.column_stack([ii[mask], jj[mask]])


def candidate_pairs(pos: np.ndarray, cell_size: float) -> np.ndarray:
    """Index pairs (i < j) whose xy grid buckets are within one step.

    Sorted-bucket spatial hash: exact distance filtering is the caller's
    job. The bucket edge must be at least the largest interaction range.
    """
    n = pos.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    gx = np.floor(pos[:, 0] / cell_size).astype(np.int64)
    gy = np.floor(pos[:, 1] / cell_size).astype(np.int64)
    span = int(max(gx.max() - gx.min(), gy.max() - gy.min())) + 3
    key = (gx - gx.min() + 1) * span + (gy - gy.min() + 1)
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    pairs = []
    # same bucket, and the four forward neighbor buckets (no double count)
    for off in (0, 1, span - 1, span, span + 1):
        if off == 0:
            starts = np.searchsorted(sorted_key, sorted_key, side="left")
            ends = np.searchsorted(sorted_key, sorted_key, side="right")
            for i in range(n):
                s, e = starts[i], ends[i]
                if e - s > 1:
                    me = order[i]
                    others = order[s:e]
                    pairs.append(np.column_stack(
                        [np.full(e - s, me), others]))
        else:
            target = sorted_key + off
            s_idx = np.searchsorted(sorted_key, target, side="left")
            e_idx = np.searchsorted(sorted_key, target, side="right")
            for i in range(n):
                if e_idx[i] > s_idx[i]:
                    me = order[i]
                    others = order[s_idx[i]:e_idx[i]]
                    pairs.append(np.column_stack(
                        [np.full(e_idx[i] - s_idx[i], me), others]))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    p = np.concatenate(pairs)
    p = p[p[:, 0] != p[:, 1]]
    lo = np.minimum(p[:, 0], p[:, 1])
    hi = np.maximum(p[:, 0], p[:, 1])
    p = np.unique(np.column_stack([lo, hi]), axis=0)
    return p


def contact_query(pos: np.ndarray, radius: np.ndarray,
                  cell_size: float | None = None) -> np.ndarray:
    """Touching pairs (i < j), via the spatial hash."""
    if pos.shape[0] < 2:
        return np.empty((0, 2), dtype=np.int64)
    if cell_size is None:
        cell_size = max(2.0 * float(radius.max()), 1e-6)
    cand = candidate_pairs(pos, cell_size)
    if cand.size == 0:
        return cand
    d = np.linalg.norm(pos[cand[:, 0]] - pos[cand[:, 1]], axis=1)
    mask = d < radius[cand[:, 0]] + radius[cand[:, 1]]
    return cand[mask]


def integrate_step(pos: np.ndarray, vel: np.ndarray, mass: np.ndarray,
                   radius: np.ndarray, bond_a: np.ndarray, bond_b: np.ndarray,
                   bond_len: np.ndarray, field: FieldHeightmap,
                   params: MechanicsParams,
                   contacts: np.ndarray | None = None,
                   pinned: np.ndarray | None = None) -> None:
    """Advance positions and velocities in place by one step.

    Forces: Hooke springs with axial damping over the given bonds, overlap
    repulsion over the contact pairs, gravity; then terrain projection
    (vertical velocity zeroed on contact) and reflective walls.
    """
    n = pos.shape[0]
    if n == 0:
        return
    force = np.zeros_like(pos)
    force[:, 2] -= params.gravity * mass

    if bond_a.size:
        delta = pos[bond_b] - pos[bond_a]
        dist = np.linalg.norm(delta, axis=1)
        safe = np.maximum(dist, 1e-12)
        axis = delta / safe[:, None]
        rel_v = np.einsum("ij,ij->i", vel[bond_b] - vel[bond_a], axis)
        mag = params.k_spring * (dist - bond_len) + params.damping * rel_v
        f = mag[:, None] * axis
        np.add.at(force, bond_a, f)
        np.add.at(force, bond_b, -f)

    if contacts is not None and contacts.size:
        ia, ib = contacts[:, 0], contacts[:, 1]
        delta = pos[ib] - pos[ia]
        dist = np.linalg.norm(delta, axis=1)
        overlap = radius[ia] + radius[ib] - dist
        active = overlap > 0
        if active.any():
            ia, ib = ia[active], ib[active]
            safe = np.maximum(dist[active], 1e-12)
            axis = delta[active] / safe[:, None]
            f = (params.k_repulsion * overlap[active])[:, None] * axis
            np.add.at(force, ia, -f)
            np.add.at(force, ib, f)

    vel += force / mass[:, None] * params.dt
    pos += vel * params.dt

    # terrain projection
    ground = field.height(pos[:, 0], pos[:, 1]) + radius
    below = pos[:, 2] < ground
    pos[below, 2] = ground[below]
    vel[below, 2] = 0.0

    # reflective walls on the field footprint
    for axis_i in (0, 1):
        low = pos[:, axis_i] < 0.0
        pos[low, axis_i] = -pos[low, axis_i]
        vel[low, axis_i] = np.abs(vel[low, axis_i])
        high = pos[:, axis_i] > FIELD_SIZE
        pos[high, axis_i] = 2.0 * FIELD_SIZE - pos[high, axis_i]
        vel[high, axis_i] = -np.abs(vel[high, axis_i])
        np.clip(pos[:, axis_i], 0.0, FIELD_SIZE, out=pos[:, axis_i])

    if pinned is not None and pinned.size:
        vel[pinned] = 0.0

    if not (np.isfinite(pos).all() and np.isfinite(vel).all()):
        bad = np.flatnonzero(~np.isfinite(pos).all(axis=1) | ~np.isfinite(vel).all(axis=1))
        raise NumericBlowupError(f"non-finite kinematics for rows {bad[:8].tolist()}")
