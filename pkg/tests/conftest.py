import numpy as np
import pytest

from bivolt import BilinearSystem


@pytest.fixture
def scalar_system():
    # a=-1, n=0.5, b=c=1, x0=0
    return BilinearSystem(A=[[-1.0]], N=[[[0.5]]], B=[[1.0]], C=[[1.0]])


@pytest.fixture
def gain2_system():
    # a=-1, n=2, b=c=1
    return BilinearSystem(A=[[-1.0]], N=[[[2.0]]], B=[[1.0]], C=[[1.0]])


def make_stable_system(rng, n=4, m=1, p=1, coupling=0.4, with_x0=False):
    """Random system with spectral abscissa of A at most -0.5."""
    A = rng.standard_normal((n, n))
    shift = float(np.max(np.linalg.eigvals(A).real)) + 0.5 + rng.uniform(0.0, 1.0)
    A = A - shift * np.eye(n)
    N = coupling * rng.standard_normal((m, n, n)) / np.sqrt(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    x0 = rng.standard_normal(n) if with_x0 else None
    return BilinearSystem(A=A, N=N, B=B, C=C, x0=x0)
