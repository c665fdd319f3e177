"""Closed-form relay and TS-ratio design with the source covariance fixed.

With uniform source precoding the rate objective separates across the
eigen-streams of the two hops, and the per-stream relay gains follow a
water-filling law driven by a single multiplier reciprocal ``mu``.  The
level function ``l_of_mu`` is strictly decreasing past the first activation
threshold and changes sign, so a bisection pins ``mu`` and the TS ratio then
falls out of the tight harvest constraint.
"""

import numpy as np

from .model import (
    LN2,
    EigenProfile,
    RelayDesign,
    SolveReport,
    SystemParams,
    harvest_budget,
    rate_scalar_form,
)
from .oracle import fixed_kkt_residual

__all__ = ["x_of_mu", "l_of_mu", "solve_fixed_source"]

MAX_BISECT_STEPS = 200
MAX_BRACKET_DOUBLINGS = 400
# Internal drive targets; far tighter than the documented guarantees so the
# multiplier error never dominates downstream residuals.
_LEVEL_ATOL_FACTOR = 1e-13
_BRACKET_RTOL = 1e-15


def _active_streams(profile: EigenProfile) -> np.ndarray:
    return (profile.alpha > 0.0) & (profile.beta > 0.0)


def x_of_mu(mu: float, profile: EigenProfile) -> np.ndarray:
    """Per-stream relay allocation for a given multiplier reciprocal.

    Entries are zero below the activation threshold
    ``mu <= ln2 (1 + rho1 alpha_k) / (rho1 alpha_k beta_k)`` and grow
    monotonically with `mu` above it.  Streams with a dead hop (alpha or
    beta zero) stay at zero.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    a = profile.rho1 * profile.alpha
    x = np.zeros(profile.n_streams)
    act = _active_streams(profile)
    if np.any(act):
        root = np.sqrt(a[act] ** 2 + (4.0 / LN2) * a[act] * profile.beta[act] * mu)
        x[act] = np.maximum(0.0, root - a[act] - 2.0) / (2.0 * profile.beta[act])
    return x


def l_of_mu(mu: float, profile: EigenProfile, params: SystemParams) -> float:
    """Level function whose root gives the optimal multiplier.

    Positive while every stream is still below threshold, strictly
    decreasing afterwards, with limit ``-(1/2) sum log2(1 + rho1 alpha_k)``
    as ``mu -> inf``.
    """
    x = x_of_mu(mu, profile)
    a = profile.rho1 * profile.alpha
    bx = profile.beta * x
    log_sum = float(np.sum(np.log2((1.0 + a) * (1.0 + bx) / (1.0 + a + bx))))
    c = params.eta / params.sigma2_sq * harvest_budget(profile.g1, params)
    return -0.5 * log_sum + (c + 0.5 * float(np.sum(x))) / mu


def _bisect_level(level, mu_lo: float, scale: float):
    """Find the root of a decreasing level function; returns (mu, steps)."""
    mu_hi = mu_lo
    for _ in range(MAX_BRACKET_DOUBLINGS):
        mu_hi *= 2.0
        if level(mu_hi) < 0.0:
            break
    else:
        raise RuntimeError("failed to bracket the multiplier root")
    lo, hi = mu_lo, mu_hi
    steps = 0
    while steps < MAX_BISECT_STEPS:
        steps += 1
        mid = 0.5 * (lo + hi)
        val = level(mid)
        if abs(val) <= _LEVEL_ATOL_FACTOR * scale:
            return mid, steps
        if val > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BRACKET_RTOL * hi:
            break
    return 0.5 * (lo + hi), steps


def _zero_design(profile: EigenProfile, params: SystemParams):
    d = profile.n_streams
    q_tilde = params.P0 * np.outer(profile.v1, profile.v1.conj())
    design = RelayDesign(
        f_mat=np.zeros((params.L, params.L), dtype=complex),
        q_mat=(params.P / d) * (profile.v1_data[:, :d] @ profile.v1_data[:, :d].conj().T),
        q_tilde=q_tilde,
        epsilon=0.0,
        scheme="fixed-source",
    )
    report = SolveReport(
        rate=0.0,
        epsilon=0.0,
        x_or_d=np.zeros(d),
        q_alloc=np.zeros(0),
        mu=0.0,
        iterations=0,
        objective_trace=[0.0],
        kkt_residual=0.0,
        constraint_slack=0.0,
        converged=True,
    )
    return design, report


def solve_fixed_source(profile: EigenProfile, params: SystemParams):
    """Optimal relay matrix and TS ratio under uniform source precoding.

    Returns ``(RelayDesign, SolveReport)``.  The relay matrix rotates the
    second-hop right-singular basis onto the first-hop left-singular basis
    with per-stream gains from the water-filling allocation; the TS ratio
    makes the harvest constraint exactly tight.  Degenerate inputs (no
    harvested energy, or every stream dead) yield the zero-rate design with
    ``epsilon = 0``.
    """
    act = _active_streams(profile)
    budget = harvest_budget(profile.g1, params)
    c = params.eta / params.sigma2_sq * budget
    if c <= 0.0 or not np.any(act):
        return _zero_design(profile, params)

    a = profile.rho1 * profile.alpha
    mu_lo = float(np.min(LN2 * (1.0 + a[act]) / (a[act] * profile.beta[act])))
    mu, steps = _bisect_level(lambda m: l_of_mu(m, profile, params), mu_lo, c)
    x = x_of_mu(mu, profile)
    x_sum = float(np.sum(x))
    epsilon = x_sum / (2.0 * c + x_sum)

    d_streams = profile.n_streams
    gains = np.sqrt(x / (1.0 + a))
    f_mat = (
        np.sqrt(params.sigma2_sq / params.sigma1_sq)
        * (profile.v2[:, :d_streams] * gains)
        @ profile.u1[:, :d_streams].conj().T
    )
    q_uniform = np.full(d_streams, params.P / d_streams)
    q_mat = (params.P / d_streams) * (
        profile.v1_data[:, :d_streams] @ profile.v1_data[:, :d_streams].conj().T
    )
    q_tilde = params.P0 * np.outer(profile.v1, profile.v1.conj())
    design = RelayDesign(
        f_mat=f_mat, q_mat=q_mat, q_tilde=q_tilde, epsilon=epsilon, scheme="fixed-source"
    )

    rate = rate_scalar_form(profile, params.sigma2_sq * x, q_uniform, epsilon, params)
    slack = epsilon * params.eta * budget - (1.0 - epsilon) / 2.0 * params.sigma2_sq * x_sum
    report = SolveReport(
        rate=rate,
        epsilon=epsilon,
        x_or_d=x,
        q_alloc=np.zeros(0),
        mu=mu,
        iterations=steps,
        objective_trace=[rate],
        kkt_residual=fixed_kkt_residual(x, mu, epsilon, profile, params),
        constraint_slack=slack,
        converged=True,
    )
    return design, report
