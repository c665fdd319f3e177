"""Independent brute-force and residual checkers for the two solvers.

The grid searches exhaustively scan the scalarized feasible set and report
the best grid point together with a per-instance resolution bound (grid
spacing times a numerically estimated gradient bound), so solver outputs can
be compared against them without any fixed fudge factor.  The KKT residual
evaluates stationarity and complementary slackness of a reported solution,
each violation normalized by its own scale.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import is_psd
from .model import (
    LN2,
    ChannelRealization,
    EigenProfile,
    RelayDesign,
    SolveReport,
    SystemParams,
    eigen_profile,
    harvest_budget,
    rate_matrix_form,
    rate_scalar_form,
)

__all__ = [
    "GridSpec",
    "FixedGridResult",
    "JointGridResult",
    "grid_search_fixed",
    "grid_search_joint",
    "kkt_residual",
    "fixed_kkt_residual",
    "joint_kkt_residual",
    "verify_design",
    "DesignCheck",
    "DesignReport",
]

# Largest TS ratio scanned by the oracles; also sets the per-variable upper
# bounds through the harvest constraint.
EPS_GRID_MAX = 0.99


@dataclass(frozen=True)
class GridSpec:
    """Axis bounds and point counts for the brute-force searches.

    ``x_max`` bounds each per-stream variable (x for the fixed problem, d
    for the joint one) and ``q_max`` each source power.  Leaving a bound at
    None derives it per instance: the harvest budget at a TS ratio of 0.99
    for x/d, the full power budget for q.
    """

    x_max: float | None = None
    q_max: float | None = None
    steps: int = 201
    eps_steps: int = 201

    def __post_init__(self):
        if self.steps < 2 or self.eps_steps < 2:
            raise ValueError("steps and eps_steps must both be at least 2")
        for bound in (self.x_max, self.q_max):
            if bound is not None and bound <= 0:
                raise ValueError("grid bounds must be positive")


@dataclass(frozen=True)
class FixedGridResult:
    x: np.ndarray
    epsilon: float
    rate: float
    resolution: float


@dataclass(frozen=True)
class JointGridResult:
    d: np.ndarray
    q: np.ndarray
    epsilon: float
    rate: float
    resolution: float


def _max_adjacent_diff(values: np.ndarray, axis: int) -> float:
    diffs = np.abs(np.diff(values, axis=axis))
    return float(diffs.max()) if diffs.size else 0.0


def grid_search_fixed(
    profile: EigenProfile, params: SystemParams, grid: GridSpec
) -> FixedGridResult:
    """Exhaustive scan of the fixed-source problem; D must be 1 or 2."""
    d_streams = profile.n_streams
    if d_streams > 2:
        raise ValueError("grid_search_fixed only supports D <= 2")
    c = params.eta / params.sigma2_sq * harvest_budget(profile.g1, params)
    x_max = grid.x_max if grid.x_max is not None else 2.0 * EPS_GRID_MAX / (1.0 - EPS_GRID_MAX) * c
    axis = np.linspace(0.0, x_max, grid.steps)
    a = profile.rho1 * profile.alpha

    # Per-stream rate terms over the axis, then their outer sum.
    terms = [
        np.log2((1.0 + a[k]) * (1.0 + profile.beta[k] * axis) / (1.0 + a[k] + profile.beta[k] * axis))
        for k in range(d_streams)
    ]
    if d_streams == 1:
        t_sum = terms[0]
        x_sum = axis
        shape = (grid.steps,)
    else:
        t_sum = (terms[0][:, None] + terms[1][None, :]).ravel()
        x_sum = (axis[:, None] + axis[None, :]).ravel()
        shape = (grid.steps, grid.steps)

    eps_axis = np.linspace(0.0, EPS_GRID_MAX, grid.eps_steps)
    best_rate = -np.inf
    best_idx = 0
    best_eps = 0.0
    for eps in eps_axis:
        feas = eps * c - (1.0 - eps) / 2.0 * x_sum >= 0.0
        if not feas.any():
            continue
        f = np.where(feas, (1.0 - eps) / 2.0 * t_sum, -np.inf)
        i = int(np.argmax(f))
        if f[i] > best_rate:
            best_rate = float(f[i])
            best_idx = i
            best_eps = float(eps)

    if d_streams == 1:
        x_best = np.array([axis[best_idx]])
    else:
        i, j = np.unravel_index(best_idx, shape)
        x_best = np.array([axis[i], axis[j]])

    d_eps = eps_axis[1] - eps_axis[0]
    resolution = 0.5 * sum(_max_adjacent_diff(t, 0) for t in terms)
    resolution += 0.5 * d_eps * float(np.max(t_sum))
    if best_rate == -np.inf:
        best_rate = 0.0
    return FixedGridResult(x=x_best, epsilon=best_eps, rate=best_rate, resolution=resolution)


def grid_search_joint(
    profile: EigenProfile, params: SystemParams, grid: GridSpec
) -> JointGridResult:
    """Exhaustive scan of the joint problem in (d, q, epsilon); D must be 1."""
    if profile.n_streams != 1:
        raise ValueError("grid_search_joint only supports D = 1")
    c = params.eta * harvest_budget(profile.g1, params)
    d_max = grid.x_max if grid.x_max is not None else 2.0 * EPS_GRID_MAX / (1.0 - EPS_GRID_MAX) * c
    q_max = grid.q_max if grid.q_max is not None else params.P
    d_axis = np.linspace(0.0, d_max, grid.steps)
    q_axis = np.linspace(0.0, q_max, grid.steps)
    eps_axis = np.linspace(0.0, EPS_GRID_MAX, grid.eps_steps)

    a_q = profile.alpha[0] * q_axis / params.sigma1_sq   # along q axis
    b_d = profile.beta[0] * d_axis / params.sigma2_sq    # along d axis
    t = np.log2(
        (1.0 + a_q[:, None]) * (1.0 + b_d[None, :]) / (1.0 + a_q[:, None] + b_d[None, :])
    )  # shape (q, d)

    best_rate = -np.inf
    best = (0.0, 0.0, 0.0)
    for eps in eps_axis:
        feas_d = eps * c - (1.0 - eps) / 2.0 * d_axis >= 0.0
        if not feas_d.any():
            continue
        f = np.where(feas_d[None, :], (1.0 - eps) / 2.0 * t, -np.inf)
        i = int(np.argmax(f))
        if f.ravel()[i] > best_rate:
            best_rate = float(f.ravel()[i])
            iq, idd = np.unravel_index(i, t.shape)
            best = (float(d_axis[idd]), float(q_axis[iq]), float(eps))

    d_eps = eps_axis[1] - eps_axis[0]
    resolution = 0.5 * _max_adjacent_diff(t, 1) + 0.5 * _max_adjacent_diff(t, 0)
    resolution += 0.5 * d_eps * float(np.max(t))
    if best_rate == -np.inf:
        best_rate = 0.0
    return JointGridResult(
        d=np.array([best[0]]),
        q=np.array([best[1]]),
        epsilon=best[2],
        rate=best_rate,
        resolution=resolution,
    )


# ---------------------------------------------------------------------------
# KKT residuals
# ---------------------------------------------------------------------------


def _slack_residual(lhs: float, rhs: float) -> float:
    """|lhs - rhs| normalized by the magnitude of both sides."""
    scale = abs(lhs) + abs(rhs)
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale


def fixed_kkt_residual(
    x: np.ndarray, mu: float, epsilon: float, profile: EigenProfile, params: SystemParams
) -> float:
    """Max normalized KKT violation of a fixed-source solution."""
    x = np.asarray(x, dtype=float)
    a = profile.rho1 * profile.alpha
    beta = profile.beta
    c = params.eta / params.sigma2_sq * harvest_budget(profile.g1, params)
    res = 0.0

    act = (profile.alpha > 0.0) & (beta > 0.0)
    if np.isfinite(mu) and mu > 0.0 and np.any(act):
        nu = 1.0 / mu
        h = (1.0 / LN2) * (a[act] / beta[act]) / (
            (x[act] + 1.0 / beta[act]) * (x[act] + (a[act] + 1.0) / beta[act])
        )
        pos = x[act] > 0.0
        if np.any(pos):
            res = max(res, float(np.max(np.abs(nu - h[pos]))) / nu)
        if np.any(~pos):
            res = max(res, max(0.0, float(np.max(h[~pos]) - nu)) / nu)
        # stationarity in the TS ratio, active only when some stream is on
        x_sum = float(np.sum(x))
        if x_sum > 0.0:
            bx = beta * x
            log_sum = float(np.sum(np.log2((1.0 + a) * (1.0 + bx) / (1.0 + a + bx))))
            lval = -0.5 * log_sum + (c + 0.5 * x_sum) / mu
            res = max(res, abs(lval) * mu / (c + 0.5 * x_sum))

    res = max(res, _slack_residual(epsilon * c, (1.0 - epsilon) / 2.0 * float(np.sum(x))))
    return res


def joint_kkt_residual(
    d: np.ndarray,
    q: np.ndarray,
    epsilon: float,
    mu1: float,
    mu2: float,
    profile: EigenProfile,
    params: SystemParams,
) -> float:
    """Max normalized KKT violation of a joint solution."""
    d = np.asarray(d, dtype=float)
    q = np.asarray(q, dtype=float)
    a_lin = profile.alpha * q / params.sigma1_sq
    b_lin = profile.beta * d / params.sigma2_sq
    c = params.eta * harvest_budget(profile.g1, params)
    res = 0.0

    if np.isfinite(mu1) and mu1 > 0.0:
        nu1 = 1.0 / mu1
        t = (1.0 / LN2) * (profile.beta / params.sigma2_sq) * a_lin / (
            (1.0 + b_lin) * (1.0 + a_lin + b_lin)
        )
        pos = d > 0.0
        if np.any(pos):
            res = max(res, float(np.max(np.abs(nu1 - t[pos]))) / nu1)
        if np.any(~pos):
            res = max(res, max(0.0, float(np.max(t[~pos]) - nu1)) / nu1)
        d_sum = float(np.sum(d))
        if d_sum > 0.0:
            log_sum = float(
                np.sum(np.log2((1.0 + a_lin) * (1.0 + b_lin) / (1.0 + a_lin + b_lin)))
            )
            lval = -0.5 * log_sum + (c + 0.5 * d_sum) / mu1
            res = max(res, abs(lval) * mu1 / (c + 0.5 * d_sum))

    res = max(res, _slack_residual(epsilon * c, (1.0 - epsilon) / 2.0 * float(np.sum(d))))

    if np.isfinite(mu2) and mu2 > 0.0:
        nu2 = 1.0 / mu2
        s = (1.0 - epsilon) / (2.0 * LN2) * (profile.alpha / params.sigma1_sq) * b_lin / (
            (1.0 + a_lin) * (1.0 + a_lin + b_lin)
        )
        pos = q > 0.0
        if np.any(pos):
            res = max(res, float(np.max(np.abs(nu2 - s[pos]))) / nu2)
        if np.any(~pos):
            res = max(res, max(0.0, float(np.max(s[~pos]) - nu2)) / nu2)
        res = max(res, abs(float(np.sum(q)) - params.P) / params.P)
    return res


def kkt_residual(
    report: SolveReport, profile: EigenProfile, params: SystemParams, which: str
) -> float:
    """Normalized first-order optimality residual of a solver report."""
    if which == "fixed":
        return fixed_kkt_residual(report.x_or_d, report.mu, report.epsilon, profile, params)
    if which == "joint":
        mu1, mu2 = report.mu
        return joint_kkt_residual(
            report.x_or_d, report.q_alloc, report.epsilon, mu1, mu2, profile, params
        )
    raise ValueError(f"which must be 'fixed' or 'joint', got {which!r}")


# ---------------------------------------------------------------------------
# design verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignCheck:
    name: str
    passed: bool
    value: float
    skipped: bool = False


@dataclass(frozen=True)
class DesignReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "skip" if c.skipped else ("pass" if c.passed else "FAIL")
            lines.append(f"{c.name:18s} {status:4s} {c.value: .3e}")
        return "\n".join(lines)


def verify_design(
    ch: ChannelRealization, design: RelayDesign, params: SystemParams
) -> DesignReport:
    """Feasibility and consistency report for a design; never raises."""
    checks = []
    tol = params.tol

    q_trace = float(np.real(np.trace(design.q_mat)))
    qt_trace = float(np.real(np.trace(design.q_tilde)))
    checks.append(DesignCheck("q_psd", is_psd(design.q_mat, tol), q_trace))
    checks.append(DesignCheck("q_tilde_psd", is_psd(design.q_tilde, tol), qt_trace))
    checks.append(DesignCheck("q_trace", q_trace <= params.P + tol, q_trace - params.P))
    checks.append(
        DesignCheck("q_tilde_trace", qt_trace <= params.P0 + tol, qt_trace - params.P0)
    )
    checks.append(
        DesignCheck(
            "epsilon_range", 0.0 <= design.epsilon < 1.0, design.epsilon
        )
    )

    ht = ch.h1_tilde
    harvested = float(np.real(np.trace(ht @ design.q_tilde @ ht.conj().T)))
    harvested += params.sigma1_sq * params.harvest_noise_count
    fh1 = design.f_mat @ ch.h1
    spend = params.sigma1_sq * float(np.real(np.trace(design.f_mat @ design.f_mat.conj().T)))
    spend += float(np.real(np.trace(fh1 @ design.q_mat @ fh1.conj().T)))
    slack = design.epsilon * params.eta * harvested - (1.0 - design.epsilon) / 2.0 * spend
    scale = design.epsilon * params.eta * harvested + (1.0 - design.epsilon) / 2.0 * spend
    checks.append(DesignCheck("harvest_slack", slack >= -tol * max(scale, 1.0), slack))

    if design.scheme in ("fixed-source", "joint"):
        try:
            profile = eigen_profile(ch, params)
            nd = profile.n_streams
            q_alloc = np.real(
                np.diag(profile.v1_data[:, :nd].conj().T @ design.q_mat @ profile.v1_data[:, :nd])
            )
            q_alloc = np.clip(q_alloc, 0.0, None)
            s_f = np.diag(profile.v2[:, :nd].conj().T @ design.f_mat @ profile.u1[:, :nd])
            f_gain = np.abs(s_f) ** 2
            d_alloc = f_gain * (profile.alpha * q_alloc + params.sigma1_sq)
            scalar = rate_scalar_form(profile, d_alloc, q_alloc, design.epsilon, params)
            matrix = rate_matrix_form(ch, design, params)
            err = abs(scalar - matrix) / max(abs(matrix), 1e-12)
            checks.append(DesignCheck("rate_match", err <= 1e-8, err))
        except (ValueError, np.linalg.LinAlgError) as exc:  # pragma: no cover
            checks.append(DesignCheck("rate_match", False, float("nan")))
            del exc
    else:
        checks.append(DesignCheck("rate_match", True, 0.0, skipped=True))

    return DesignReport(checks=tuple(checks))
