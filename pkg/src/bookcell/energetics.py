"""Energy bookkeeping: decay, light, predation, transport, generation cost.

All rates are per unit time; callers multiply by the step size where a
formula is discrete. The closed-form equilibrium energy

    E_inf = dE_L / (1 - exp(-U / (P * dS)))

ties the whole economy together: a cell fed by photons at rate P*dS while
decaying at rate U converges to E_inf, and the cost of creating a cell is a
fixed fraction of the E_inf it would reach under the sun alone. The oracle
functions at the bottom check the derivation numerically and back the
`validate-appendix` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Stream


class EnergeticsError(ValueError):
    pass


class NoLightError(EnergeticsError):
    """P * dS = 0: the equilibrium energy is undefined."""


class TimestepError(EnergeticsError):
    pass


@dataclass(frozen=True)
class EnergyParams:
    C: float = 1.0            # decay coefficient, > 0
    A: float = 2.0            # decay base, > 1 (world-adaptive)
    n_max: int = 6            # connection capacity
    c_rgb: tuple[float, float, float] = (0.8, 0.2, 0.8)
    gen_factor: float = 0.5   # fraction of E_inf passed to a child
    e_death: float = 1e-3
    k_transfer: float = 0.1
    k_emit: float = 0.01
    delta_s: float = 0.1

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise EnergeticsError("C must be > 0")
        if self.A <= 1:
            raise EnergeticsError("A must be > 1")


@dataclass(frozen=True)
class PhotonChannel:
    """Source emission constant D, source radius R, distance h, catch area dS."""

    D: float
    R: float
    h: float
    dS: float


def decay_rate(params: EnergyParams, n_connected: int) -> float:
    """U = C * A^n / A^n_max; grows with the number of connections."""
    if not 0 <= n_connected <= params.n_max:
        raise EnergeticsError(f"connection count {n_connected} outside [0, {params.n_max}]")
    return params.C * params.A ** (n_connected - params.n_max)


def step_decay(energy: float, u: float, dt: float) -> float:
    """One discrete decay step E * (1 - U dt); requires U dt < 1."""
    if u * dt >= 1.0:
        raise TimestepError(f"U*dt = {u * dt} >= 1; reduce the step size")
    return energy * (1.0 - u * dt)


def absorb_light(intensity, absorption, c_rgb=(0.8, 0.2, 0.8)) -> float:
    """dE_L = sum over channels of c * I * a."""
    return sum(c * i * a for c, i, a in zip(c_rgb, intensity, absorption))


def eat_gain(d: float, n_eater: int, n_prey: int, n_max: int,
             prey_energy: float) -> float:
    """Energy transferred by one bite; zero unless the eater is better connected."""
    if n_eater > n_max or n_prey > n_max:
        raise EnergeticsError("connection count exceeds capacity")
    if n_eater <= n_prey or d <= 0.0:
        return 0.0
    fraction = d * (n_eater - n_prey) / n_max
    return fraction * prey_energy


def photon_flux(channel: PhotonChannel) -> float:
    """P = D R^2 / (4 pi h^2)."""
    if channel.h <= 0:
        raise EnergeticsError("source distance must be positive")
    return channel.D * channel.R ** 2 / (4.0 * math.pi * channel.h ** 2)


def hit_probability(p_flux: float, dS: float, dt: float) -> float:
    """p = P * dS * dt, clamped to [0, 1]."""
    return min(p_flux * dS * dt, 1.0)


def e_infinity(de_l: float, u: float, p_flux: float, dS: float) -> float:
    """Equilibrium energy under periodic photon arrivals."""
    if u <= 0:
        raise EnergeticsError("decay rate U must be positive")
    rate = p_flux * dS
    if rate <= 0:
        raise NoLightError("no light reaches the cell (P * dS = 0)")
    return de_l / (1.0 - math.exp(-u / rate))


def generation_cost(absorption, radius: float, sun_channel: PhotonChannel,
                    sun_color, params: EnergyParams,
                    child_connections: int = 1) -> float:
    """Energy handed to a new cell: gen_factor * E_inf under the sun alone.

    Evaluated with the child's absorption, catch area pi r^2, and its decay
    rate at birth (one connection, the automatic bond to the parent).
    Returns inf when no sun light could ever reach the child.
    """
    de_l = absorb_light(sun_color, absorption, params.c_rgb)
    if de_l <= 0.0:
        return 0.0
    u = decay_rate(params, child_connections)
    ds = math.pi * radius ** 2
    try:
        e_inf = e_infinity(de_l, u, photon_flux(sun_channel), ds)
    except NoLightError:
        return math.inf
    return params.gen_factor * e_inf


def transport_energy(sender_energy: float, e_out: float, k_transfer: float,
                     dt: float) -> float:
    """Amount moved across one bond this step; zero for non-positive drive."""
    if e_out <= 0.0:
        return 0.0
    return sender_energy * e_out * k_transfer * dt


# ---------------------------------------------------------------------------
# Validation oracles (the appendix math, checked numerically)
# ---------------------------------------------------------------------------

def decay_convergence_error(e0: float, u: float, t: float, n_steps: int) -> float:
    """Relative gap between n iterated decay steps and E0 * exp(-U t)."""
    dt = t / n_steps
    factor = 1.0 - u * dt
    if factor <= 0:
        raise TimestepError("U*dt >= 1 in oracle")
    e = e0
    for _ in range(n_steps):
        e *= factor
    exact = e0 * math.exp(-u * t)
    return abs(e - exact) / exact


def fixed_point_gap(u: float, t_period: float, de_l: float, n_iter: int) -> tuple[float, float]:
    """Iterate f <- e^{-UT} f + dE_L; return (final value, |gap to the limit|)."""
    r = math.exp(-u * t_period)
    limit = de_l / (1.0 - r)
    f = 0.0
    for _ in range(n_iter):
        f = r * f + de_l
    return f, abs(f - limit)


def waiting_time_trial(p: float, n_hits: int, stream: Stream) -> float:
    """Mean photon inter-arrival over Bernoulli steps; expectation is 1/p.

    The mean of the first n gaps is the step index of the n-th hit divided
    by n, so only that index needs to be found.
    """
    hits = 0
    steps_before = 0
    while True:
        block = stream.uniform(65536) < p
        idx = np.flatnonzero(block)
        if hits + idx.size >= n_hits:
            nth = idx[n_hits - hits - 1]
            return (steps_before + int(nth) + 1) / n_hits
        hits += idx.size
        steps_before += block.size


def stochastic_e_infinity(p: float, u: float, de_l: float, n_arrivals: int,
                          stream: Stream) -> tuple[float, float]:
    """Simulate E over geometric photon arrivals.

    Returns (mean E over the second half of arrivals, empirical mean gap).
    The mean converges to the closed form d E_L / (1 - e^{-U/p}) as U/p -> 0.
    """
    gaps = (np.floor(np.log(1.0 - stream.uniform(n_arrivals)) / math.log(1.0 - p)) + 1.0)
    e = 0.0
    total = 0.0
    half = n_arrivals // 2
    for i, g in enumerate(gaps):
        e = e * math.exp(-u * g) + de_l
        if i >= half:
            total += e
    return total / (n_arrivals - half), float(gaps.mean())
