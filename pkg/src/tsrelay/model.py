"""System model for the two-hop energy-harvesting MIMO relay link.

The link runs in two phases per block: for a fraction ``epsilon`` of the
block the relay harvests RF energy radiated by the source, and for the
remaining ``1 - epsilon`` the source transmits data which the relay linearly
amplifies and forwards to the destination.  This module holds the physical
parameters, the Rician channel generator, the eigen-profile extraction that
both solvers consume, the achievable-rate evaluators (full matrix form and
the equivalent per-stream scalar form), the harvest-energy budget, and the
naive amplify-and-forward baseline.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .linalg import svd_descending

__all__ = [
    "SystemParams",
    "ChannelRealization",
    "EigenProfile",
    "RelayDesign",
    "SolveReport",
    "generate_channel",
    "eigen_profile",
    "harvested_power_max",
    "harvest_budget",
    "rate_matrix_form",
    "rate_scalar_form",
    "harvest_constraint_slack",
    "naf_design",
    "read_channel_file",
    "write_channel_file",
]

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class SystemParams:
    """Scalar physical constants of one link configuration.

    Powers and noise variances are linear (watt-equivalent) quantities.
    ``harvest_noise_dim`` selects how many noise streams are counted in the
    harvested-energy budget: ``"D"`` counts the data streams and keeps the
    closed-form constants, ``"L"`` counts every relay antenna.  All
    harvest-side expressions in this package (solvers, slack, NAF scaling)
    use the same switch so solver outputs are exactly tight.
    """

    P: float            # source power in the data phase
    P0: float           # source power threshold in the energy phase
    sigma1_sq: float    # relay noise variance
    sigma2_sq: float    # destination noise variance
    eta: float          # energy conversion efficiency, 0..1
    D: int              # number of data streams
    M: int              # source antennas
    L: int              # relay antennas
    N: int              # destination antennas
    tol: float = 1e-9   # numeric tolerance for feasibility checks
    harvest_noise_dim: str = "D"

    def __post_init__(self):
        if min(self.P, self.P0, self.sigma1_sq, self.sigma2_sq) <= 0:
            raise ValueError("P, P0 and noise variances must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if min(self.M, self.L, self.N) < 1:
            raise ValueError("antenna counts must be at least 1")
        if not 1 <= self.D <= min(self.M, self.L, self.N):
            raise ValueError(
                f"D must satisfy 1 <= D <= min(M, L, N) = {min(self.M, self.L, self.N)}"
            )
        if self.harvest_noise_dim not in ("D", "L"):
            raise ValueError("harvest_noise_dim must be 'D' or 'L'")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    @property
    def rho1(self) -> float:
        """Per-stream SNR at the relay in the data phase."""
        return self.P / (self.D * self.sigma1_sq)

    @property
    def harvest_noise_count(self) -> int:
        return self.D if self.harvest_noise_dim == "D" else self.L


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the three channel matrices.

    ``h1_tilde`` (L x M) is the source-to-relay channel during the energy
    phase, ``h1`` (L x M) the same hop during the data phase, and ``h2``
    (N x L) the relay-to-destination channel.  ``seed`` records the RNG seed
    when the draw came from :func:`generate_channel` (None for channels read
    from a file).
    """

    h1_tilde: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        for name in ("h1_tilde", "h1", "h2"):
            m = getattr(self, name)
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
        if self.h1.shape != self.h1_tilde.shape:
            raise ValueError("h1 and h1_tilde must have identical shapes")
        if self.h2.shape[1] != self.h1.shape[0]:
            raise ValueError("h2 column count must equal the relay antenna count")


@dataclass(frozen=True)
class EigenProfile:
    """Spectra and unitary factors extracted from one channel realization.

    ``alpha`` and ``beta`` are the top-D squared singular values of the two
    data-phase hops (descending).  ``g1``/``v1`` are the top eigenvalue and
    right-singular vector of the energy-phase channel; they set the harvest
    budget.  The unitary factors are kept so solved per-stream allocations
    can be lifted back to full relay/source matrices.
    """

    alpha: np.ndarray       # length D, eigenvalues of h1 @ h1^H
    beta: np.ndarray        # length D, eigenvalues of h2^H @ h2
    g1: float               # top eigenvalue of h1_tilde @ h1_tilde^H
    v1: np.ndarray          # top right-singular vector of h1_tilde (length M)
    rho1: float             # P / (D * sigma1_sq)
    u1: np.ndarray          # left singular vectors of h1   (L x r1)
    v1_data: np.ndarray     # right singular vectors of h1  (M x r1)
    u2: np.ndarray          # left singular vectors of h2   (N x r2)
    v2: np.ndarray          # right singular vectors of h2  (L x r2)

    @property
    def n_streams(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class RelayDesign:
    """A complete operating point: relay matrix, covariances and TS ratio."""

    f_mat: np.ndarray       # L x L relay beamformer
    q_mat: np.ndarray       # M x M data-phase source covariance
    q_tilde: np.ndarray     # M x M energy-phase source covariance
    epsilon: float          # time-switching ratio in [0, 1)
    scheme: str             # one of "fixed-source", "joint", "naf"


@dataclass(frozen=True)
class SolveReport:
    """Solver diagnostics attached to a returned design.

    ``x_or_d`` holds the per-stream auxiliary allocation (x for the
    fixed-source solver, d for the joint solver), ``q_alloc`` the per-stream
    source powers (empty for fixed-source), and ``mu`` the multiplier
    reciprocal (a float for fixed-source, a (mu1, mu2) pair for joint).
    """

    rate: float
    epsilon: float
    x_or_d: np.ndarray
    q_alloc: np.ndarray
    mu: float | tuple
    iterations: int
    objective_trace: list = field(default_factory=list)
    kkt_residual: float = 0.0
    constraint_slack: float = 0.0
    converged: bool = True


# ---------------------------------------------------------------------------
# channel generation and eigen profile
# ---------------------------------------------------------------------------


def _rician_matrix(rng, rows, cols, rician_k, scatter_var):
    los = np.ones((rows, cols), dtype=complex)
    w = np.sqrt(scatter_var / 2.0) * (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    )
    return np.sqrt(rician_k / (rician_k + 1.0)) * los + np.sqrt(1.0 / (rician_k + 1.0)) * w


def generate_channel(
    params: SystemParams,
    rician_k: float = 1.0,
    scatter_var: float = 0.1,
    seed: int = 0,
    reuse_energy_channel: bool = False,
) -> ChannelRealization:
    """Draw one Rician channel realization, deterministically per seed.

    Each matrix is ``sqrt(K/(K+1)) * ones + sqrt(1/(K+1)) * W`` where the
    entries of W are i.i.d. circularly-symmetric complex Gaussian with
    variance `scatter_var`.  The draw order is h1, h2, h1_tilde, so flipping
    `reuse_energy_channel` (which sets ``h1_tilde = h1``) never changes the
    data-phase matrices produced by a given seed.
    """
    if rician_k < 0:
        raise ValueError("rician_k must be nonnegative")
    if scatter_var <= 0:
        raise ValueError("scatter_var must be positive")
    rng = np.random.default_rng(seed)
    h1 = _rician_matrix(rng, params.L, params.M, rician_k, scatter_var)
    h2 = _rician_matrix(rng, params.N, params.L, rician_k, scatter_var)
    if reuse_energy_channel:
        h1_tilde = h1.copy()
    else:
        h1_tilde = _rician_matrix(rng, params.L, params.M, rician_k, scatter_var)
    return ChannelRealization(h1_tilde=h1_tilde, h1=h1, h2=h2, seed=seed)


def eigen_profile(ch: ChannelRealization, params: SystemParams) -> EigenProfile:
    """SVD-derived spectra and unitary factors for the solvers."""
    d = params.D
    u1, s1, v1 = svd_descending(ch.h1)
    u2, s2, v2 = svd_descending(ch.h2)
    if d > len(s1) or d > len(s2):
        raise ValueError(f"D={d} exceeds the available singular values")
    _, st, vt = svd_descending(ch.h1_tilde)
    return EigenProfile(
        alpha=s1[:d] ** 2,
        beta=s2[:d] ** 2,
        g1=float(st[0] ** 2),
        v1=vt[:, 0],
        rho1=params.rho1,
        u1=u1,
        v1_data=v1,
        u2=u2,
        v2=v2,
    )


# ---------------------------------------------------------------------------
# harvested power
# ---------------------------------------------------------------------------


def harvested_power_max(h1_tilde: np.ndarray, params: SystemParams):
    """Best energy-phase covariance and the power it harvests.

    Beamforming the full energy budget P0 onto the top right-singular
    direction of the energy-phase channel maximizes the received power over
    all PSD covariances with trace at most P0.  Returns
    ``(g1 * P0 + sigma1_sq * D, P0 * v1 v1^H)``.
    """
    _, st, vt = svd_descending(h1_tilde)
    g1 = float(st[0] ** 2)
    v1 = vt[:, 0:1]
    q_tilde = params.P0 * (v1 @ v1.conj().T)
    power = g1 * params.P0 + params.sigma1_sq * params.D
    return power, q_tilde


def harvest_budget(g1: float, params: SystemParams) -> float:
    """Harvested power that feeds the solvers' energy constraint.

    ``g1 * P0 + sigma1_sq * n`` with n set by ``params.harvest_noise_dim``.
    """
    return g1 * params.P0 + params.sigma1_sq * params.harvest_noise_count


# ---------------------------------------------------------------------------
# rate evaluation
# ---------------------------------------------------------------------------


def _psd_sqrt(q: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (q + q.conj().T))
    w = np.clip(w, 0.0, None)
    return v @ np.diag(np.sqrt(w)) @ v.conj().T


def rate_matrix_form(
    ch: ChannelRealization, design: RelayDesign, params: SystemParams
) -> float:
    """Achievable rate of an arbitrary design, in bits per channel use.

    Evaluates ``(1-eps)/2 * log2 det(I + H2 F H1 Q H1^H F^H H2^H W^-1)``
    with ``W = sigma2_sq I + sigma1_sq H2 F F^H H2^H``.  The determinant is
    computed through a Cholesky whitening of W followed by a Hermitian
    eigenvalue sum, which stays stable for near-singular signal terms.
    """
    eps = design.epsilon
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
    if eps == 1.0:
        return 0.0
    hf = ch.h2 @ design.f_mat
    noise = params.sigma2_sq * np.eye(params.N) + params.sigma1_sq * (hf @ hf.conj().T)
    ln = np.linalg.cholesky(noise)
    b = np.linalg.solve(ln, hf @ ch.h1 @ _psd_sqrt(design.q_mat))
    lam = np.clip(np.linalg.eigvalsh(b @ b.conj().T), 0.0, None)
    return float((1.0 - eps) / 2.0 * np.sum(np.log1p(lam)) / LN2)


def rate_scalar_form(
    profile: EigenProfile,
    d,
    q,
    epsilon: float,
    params: SystemParams,
) -> float:
    """Per-stream form of the achievable rate.

    ``(1-eps)/2 * sum_k log2[(1 + a_k)(1 + b_k) / (1 + a_k + b_k)]`` with
    ``a_k = alpha_k q_k / sigma1_sq`` and ``b_k = beta_k d_k / sigma2_sq``.
    Matches :func:`rate_matrix_form` exactly on designs assembled from the
    same (d, q, epsilon) triple.
    """
    d = np.asarray(d, dtype=float)
    q = np.asarray(q, dtype=float)
    if d.shape != (profile.n_streams,) or q.shape != (profile.n_streams,):
        raise ValueError("d and q must both have one entry per stream")
    if np.any(d < 0) or np.any(q < 0):
        raise ValueError("d and q must be elementwise nonnegative")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    a = profile.alpha * q / params.sigma1_sq
    b = profile.beta * d / params.sigma2_sq
    terms = np.log2((1.0 + a) * (1.0 + b) / (1.0 + a + b))
    return float((1.0 - epsilon) / 2.0 * np.sum(terms))


def harvest_constraint_slack(
    ch: ChannelRealization, design: RelayDesign, params: SystemParams
) -> float:
    """Harvested-energy budget minus the relay's transmit spend.

    Positive slack means the design is feasible.  The energy side counts
    ``sigma1_sq`` noise streams according to ``params.harvest_noise_dim`` so
    that solver outputs are exactly tight under either convention.
    """
    ht = ch.h1_tilde
    harvested = float(np.real(np.trace(ht @ design.q_tilde @ ht.conj().T)))
    harvested += params.sigma1_sq * params.harvest_noise_count
    fh1 = design.f_mat @ ch.h1
    spend = params.sigma1_sq * float(
        np.real(np.trace(design.f_mat @ design.f_mat.conj().T))
    )
    spend += float(np.real(np.trace(fh1 @ design.q_mat @ fh1.conj().T)))
    return design.epsilon * params.eta * harvested - (1.0 - design.epsilon) / 2.0 * spend


# ---------------------------------------------------------------------------
# naive AF baseline
# ---------------------------------------------------------------------------


def naf_design(
    ch: ChannelRealization, params: SystemParams, epsilon_uniform: float
) -> RelayDesign:
    """Naive amplify-and-forward baseline.

    Uses uniform source covariance ``(P/D) I``, an identity-shaped relay
    matrix ``sqrt(chi) I``, and the TS ratio produced by the fixed-source
    solver on the same channel.  ``chi`` spends the harvested budget
    exactly, so the design's harvest slack is zero by construction.
    """
    if not 0.0 <= epsilon_uniform < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon_uniform}")
    q_mat = (params.P / params.D) * np.eye(params.M, dtype=complex)
    _, st, vt = svd_descending(ch.h1_tilde)
    v1 = vt[:, 0:1]
    q_tilde = params.P0 * (v1 @ v1.conj().T)
    budget = harvest_budget(float(st[0] ** 2), params)
    h1q = ch.h1 @ q_mat @ ch.h1.conj().T
    spend_per_chi = params.sigma1_sq * params.L + float(np.real(np.trace(h1q)))
    chi = (
        2.0 * epsilon_uniform * params.eta * budget
        / ((1.0 - epsilon_uniform) * spend_per_chi)
    )
    f_mat = np.sqrt(chi) * np.eye(params.L, dtype=complex)
    return RelayDesign(
        f_mat=f_mat,
        q_mat=q_mat,
        q_tilde=q_tilde,
        epsilon=epsilon_uniform,
        scheme="naf",
    )


# ---------------------------------------------------------------------------
# channel-instance files
# ---------------------------------------------------------------------------


def _format_entry(z: complex) -> str:
    return f"{z.real:.15e}{z.imag:+.15e}i"


def _write_block(buf, label, m):
    buf.write(label + "\n")
    for row in m:
        buf.write(" ".join(_format_entry(z) for z in row) + "\n")


def channel_to_text(ch: ChannelRealization, d: int) -> str:
    """Serialize a channel realization in the textual instance format."""
    l, m = ch.h1.shape
    n = ch.h2.shape[0]
    buf = io.StringIO()
    buf.write(f"{m} {l} {n} {d}\n")
    _write_block(buf, "H1_TILDE", ch.h1_tilde)
    _write_block(buf, "H1", ch.h1)
    _write_block(buf, "H2", ch.h2)
    return buf.getvalue()


def write_channel_file(path, ch: ChannelRealization, d: int) -> None:
    with open(path, "w") as fh:
        fh.write(channel_to_text(ch, d))


def _parse_block(lines, idx, label, rows, cols):
    if idx >= len(lines) or lines[idx].strip() != label:
        raise ValueError(f"expected block label {label!r} at line {idx + 1}")
    idx += 1
    block = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        if idx >= len(lines):
            raise ValueError(f"unexpected end of file inside block {label!r}")
        tokens = lines[idx].split()
        if len(tokens) != cols:
            raise ValueError(
                f"block {label!r} row {r + 1}: expected {cols} entries, got {len(tokens)}"
            )
        block[r] = [complex(t[:-1] + "j") if t.endswith("i") else complex(t) for t in tokens]
        idx += 1
    return block, idx


def read_channel_file(path):
    """Read a channel-instance file; returns ``(ChannelRealization, (M, L, N, D))``."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("empty channel file")
    header = lines[0].split()
    if len(header) != 4:
        raise ValueError("header must contain exactly 'M L N D'")
    m, l, n, d = (int(t) for t in header)
    idx = 1
    h1_tilde, idx = _parse_block(lines, idx, "H1_TILDE", l, m)
    h1, idx = _parse_block(lines, idx, "H1", l, m)
    h2, idx = _parse_block(lines, idx, "H2", n, l)
    ch = ChannelRealization(h1_tilde=h1_tilde, h1=h1, h2=h2, seed=None)
    return ch, (m, l, n, d)
