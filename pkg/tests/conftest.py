import numpy as np
import pytest

from tsrelay.model import EigenProfile, SystemParams, eigen_profile, generate_channel


def make_params(D=2, n=4, **overrides):
    """SystemParams with the sweep defaults and M = L = N = n."""
    kwargs = dict(
        P=1.0, P0=1.0, sigma1_sq=0.1, sigma2_sq=0.1, eta=0.8, D=D, M=n, L=n, N=n
    )
    kwargs.update(overrides)
    return SystemParams(**kwargs)


def make_instance(params, seed, rician_k=1.0, scatter_var=0.1):
    ch = generate_channel(params, rician_k=rician_k, scatter_var=scatter_var, seed=seed)
    return ch, eigen_profile(ch, params)


def make_profile(alpha, beta, g1, params, dims=None):
    """Synthetic eigen profile with identity unitary factors.

    Good enough for every operation that only consumes the spectra; `dims`
    can enlarge the factor matrices when a design will be assembled.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = len(alpha)
    m = params.M if dims is None else dims[0]
    l = params.L if dims is None else dims[1]
    n = params.N if dims is None else dims[2]
    v1 = np.zeros(m, dtype=complex)
    v1[0] = 1.0
    return EigenProfile(
        alpha=alpha,
        beta=beta,
        g1=float(g1),
        v1=v1,
        rho1=params.rho1,
        u1=np.eye(l, min(l, m), dtype=complex),
        v1_data=np.eye(m, min(l, m), dtype=complex),
        u2=np.eye(n, min(n, l), dtype=complex),
        v2=np.eye(l, min(n, l), dtype=complex),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
